//! A native containers implementation speaking the axiomtest line protocol.
//!
//! Containers are vectors plus a hidden operation counter, so two containers
//! holding the same items can differ internally. Container values are never
//! serialized: they are answered with OPAQUE.
//!
//! `--mode garbage|crash|mute` makes it misbehave after the handshake.

use std::io::{self, BufRead, Write};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Honest,
    Garbage,
    Crash,
    Mute,
}

#[derive(Clone, Debug)]
struct Container {
    items: Vec<u64>,
    ops: u64,
}

#[derive(Clone, Debug)]
enum Value {
    Nat(u64),
    Bool(bool),
    Container(Container),
}

fn insert(x: u64, mut c: Container) -> Container {
    c.items.insert(0, x);
    c.ops += 1;
    c
}

// deletes the first occurrence only
fn remove(x: u64, mut c: Container) -> Container {
    if let Some(i) = c.items.iter().position(|&y| y == x) {
        c.items.remove(i);
    }
    c.ops += 1;
    c
}

struct Reader<'a> {
    s: &'a [u8],
    i: usize,
}

impl Reader<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.i..].starts_with(tok.as_bytes()) {
            self.i += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), String> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(format!("expected `{tok}` at offset {}", self.i))
        }
    }

    fn word(&mut self) -> String {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.i]).into_owned()
    }

    // term := atom [ "::" term ]
    fn term(&mut self) -> Result<Value, String> {
        let head = self.atom()?;
        if self.eat("::") {
            let tail = self.term()?;
            return match (head, tail) {
                (Value::Nat(x), Value::Container(c)) => Ok(Value::Container(insert(x, c))),
                _ => Err("ill-sorted ::".into()),
            };
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Value, String> {
        if self.eat("(") {
            let v = self.term()?;
            self.expect(")")?;
            return Ok(v);
        }
        if self.eat("[]") {
            return Ok(Value::Container(Container { items: vec![], ops: 0 }));
        }
        let w = self.word();
        if let Ok(n) = w.parse::<u64>() {
            return Ok(Value::Nat(n));
        }
        match w.as_str() {
            "true" => return Ok(Value::Bool(true)),
            "false" => return Ok(Value::Bool(false)),
            "" => return Err(format!("unexpected input at offset {}", self.i)),
            _ => {}
        }
        self.expect("(")?;
        let mut args = vec![self.term()?];
        while self.eat(",") {
            args.push(self.term()?);
        }
        self.expect(")")?;
        apply(&w, args)
    }
}

fn apply(op: &str, args: Vec<Value>) -> Result<Value, String> {
    use Value::*;
    let mut it = args.into_iter();
    let (a, b) = (it.next(), it.next());
    if it.next().is_some() {
        return Err(format!("too many arguments to {op}"));
    }
    match (op, a, b) {
        ("succ", Some(Nat(n)), None) => Ok(Nat(n + 1)),
        ("eq", Some(Nat(x)), Some(Nat(y))) => Ok(Bool(x == y)),
        ("notb", Some(Bool(b)), None) => Ok(Bool(!b)),
        ("isin", Some(Nat(x)), Some(Container(c))) => Ok(Bool(c.items.contains(&x))),
        ("remove", Some(Nat(x)), Some(Container(c))) => Ok(Container(remove(x, c))),
        _ => Err(format!("cannot apply {op}")),
    }
}

fn eval(text: &str) -> Result<Value, String> {
    let mut r = Reader { s: text.as_bytes(), i: 0 };
    let v = r.term()?;
    r.ws();
    if r.i != r.s.len() {
        return Err(format!("trailing input at offset {}", r.i));
    }
    Ok(v)
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = match args.iter().position(|a| a == "--mode").and_then(|i| args.get(i + 1)) {
        None => Mode::Honest,
        Some(m) => match m.as_str() {
            "garbage" => Mode::Garbage,
            "crash" => Mode::Crash,
            "mute" => Mode::Mute,
            "honest" => Mode::Honest,
            other => {
                eprintln!("unknown mode {other}");
                std::process::exit(2);
            }
        },
    };
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let reply = if line.starts_with("HELLO ") {
            if line.trim_end() != "HELLO axiomtest/1" {
                "ERROR unsupported protocol version".to_string()
            } else {
                "OK containers-native".to_string()
            }
        } else if line.trim_end() == "BYE" {
            break;
        } else if let Some(t) = line.strip_prefix("EVAL ") {
            match mode {
                Mode::Garbage => "VALUE ))(".to_string(),
                Mode::Crash => std::process::exit(101),
                Mode::Mute => {
                    std::thread::sleep(std::time::Duration::from_secs(3600));
                    continue;
                }
                Mode::Honest => match eval(t) {
                    Ok(Value::Nat(n)) => format!("VALUE {n}"),
                    Ok(Value::Bool(b)) => format!("VALUE {b}"),
                    Ok(Value::Container(_)) => "OPAQUE".to_string(),
                    Err(e) => format!("ERROR {e}"),
                },
            }
        } else {
            format!("ERROR unknown request `{line}`")
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
}
