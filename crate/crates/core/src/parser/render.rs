use crate::term::{Specification, Term};

fn numeral(t: &Term) -> Option<u64> {
    match t {
        Term::App(op, args) if op.name == "0" && args.is_empty() => Some(0),
        Term::App(op, args)
            if op.name == "succ" && args.len() == 1 && op.arg_sorts[0] == op.result =>
        {
            let inner = numeral(&args[0])?;
            (args[0].sort() == &op.result).then_some(inner + 1)
        }
        _ => None,
    }
}

fn is_cons(t: &Term) -> bool {
    matches!(t, Term::App(op, args) if op.name == "::" && args.len() == 2)
}

/// Prefix form with `::` infix and decimal numerals.
pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    if let Some(n) = numeral(t) {
        out.push_str(&n.to_string());
        return;
    }
    match t {
        Term::Var(v) => out.push_str(&v.name),
        Term::App(_, args) if is_cons(t) => {
            if is_cons(&args[0]) {
                out.push('(');
                write_term(&args[0], out);
                out.push(')');
            } else {
                write_term(&args[0], out);
            }
            out.push_str(" :: ");
            write_term(&args[1], out);
        }
        Term::App(op, args) if args.is_empty() => out.push_str(&op.name),
        Term::App(op, args) => {
            out.push_str(&op.name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(a, out);
            }
            out.push(')');
        }
    }
}

/// Canonical text of a flattened specification.
pub fn render_spec(spec: &Specification) -> String {
    let sig = &spec.signature;
    let mut out = String::new();
    if !spec.imports.is_empty() {
        out.push_str(&format!("-- flattened from: {}\n", spec.imports.join(", ")));
    }
    out.push_str(&format!("spec {}\n", spec.name));
    let sorts: Vec<&str> = sig.sorts.iter().map(|s| s.name()).collect();
    out.push_str(&format!("  sorts {}\n", sorts.join(", ")));
    let all_observable = sig.sorts.iter().all(|s| sig.observable.contains(s));
    if !all_observable && !sig.observable.is_empty() {
        let obs: Vec<&str> = sig
            .sorts
            .iter()
            .filter(|s| sig.observable.contains(*s))
            .map(|s| s.name())
            .collect();
        out.push_str(&format!("  observable {}\n", obs.join(", ")));
    }
    let decl = |op: &crate::term::OpSymbol| {
        let args: Vec<&str> = op.arg_sorts.iter().map(|s| s.name()).collect();
        if args.is_empty() {
            format!("    {} : -> {}\n", op.name, op.result)
        } else {
            format!("    {} : {} -> {}\n", op.name, args.join(", "), op.result)
        }
    };
    out.push_str("  constructors\n");
    for op in sig.ops.iter().filter(|o| o.constructor) {
        out.push_str(&decl(op));
    }
    if sig.ops.iter().any(|o| !o.constructor) {
        out.push_str("  ops\n");
        for op in sig.ops.iter().filter(|o| !o.constructor) {
            out.push_str(&decl(op));
        }
    }
    if !sig.vars.is_empty() {
        out.push_str("  vars\n");
        for v in &sig.vars {
            out.push_str(&format!("    {} : {}\n", v.name, v.sort));
        }
    }
    out.push_str("  axioms\n");
    for ax in &spec.axioms {
        out.push_str(&format!("    {ax}\n"));
    }
    out.push_str("end\n");
    out
}
