//! OpenQASM 2.0 subset: one `qreg`, at most one `creg`, the fixed gate set,
//! `measure`, `reset` and `//` comments. Angle arguments accept numeric
//! literals, `pi`, and `+ - * /` with parentheses.

use std::fmt::Write as _;

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let v = s.parse::<f64>().map_err(|_| Error::Syntax {
                line: l0,
                column: c0,
                message: format!("bad number `{s}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(v),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(Error::Syntax {
                    line: l0,
                    column: c0,
                    message: "unterminated string".into(),
                });
            }
            let s: String = chars[start..i].iter().collect();
            i += 1;
            col += s.chars().count() + 2;
            out.push(Token {
                tok: Tok::Str(s),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            col += 2;
            out.push(Token {
                tok: Tok::Arrow,
                line: l0,
                col: c0,
            });
            continue;
        }
        if "[]();,+-*/{}=<>^".contains(c) {
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Sym(c),
                line: l0,
                col: c0,
            });
            continue;
        }
        return Err(Error::Syntax {
            line: l0,
            column: c0,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn unsupported<T>(&self, at: (usize, usize), message: impl Into<String>) -> Result<T> {
        Err(Error::Unsupported {
            line: at.0,
            column: at.1,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.syntax(format!("expected `{c}`")),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.syntax("expected identifier"),
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Token { tok: Tok::Num(v), .. }) if v.fract() == 0.0 && *v >= 0.0 => {
                let v = *v as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => self.syntax("expected non-negative integer"),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        loop {
            if self.eat_sym('*') {
                v *= self.factor()?;
            } else if self.eat_sym('/') {
                v /= self.factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64> {
        if self.eat_sym('-') {
            return Ok(-self.factor()?);
        }
        if self.eat_sym('+') {
            return self.factor();
        }
        if self.eat_sym('(') {
            let v = self.expr()?;
            self.expect_sym(')')?;
            return Ok(v);
        }
        let at = self.here();
        match self.next() {
            Some(Token { tok: Tok::Num(v), .. }) => Ok(v),
            Some(Token { tok: Tok::Ident(s), .. }) if s == "pi" => Ok(std::f64::consts::PI),
            Some(Token { tok: Tok::Ident(s), .. }) => {
                self.unsupported(at, format!("parameter expression `{s}`"))
            }
            _ => {
                self.pos -= 1;
                self.syntax("expected angle expression")
            }
        }
    }

    fn indexed(&mut self, classical: bool) -> Result<usize> {
        let at = self.here();
        let name = self.ident()?;
        if !matches!(self.peek(), Some(Token { tok: Tok::Sym('['), .. })) {
            return self.unsupported(at, format!("whole-register argument `{name}`"));
        }
        self.expect_sym('[')?;
        let idx_at = self.here();
        let idx = self.int()?;
        self.expect_sym(']')?;
        let reg = if classical { &self.creg } else { &self.qreg };
        match reg {
            Some((n, size)) if *n == name => {
                if idx >= *size {
                    Err(Error::IndexOutOfRange(format!(
                        "{}:{}: {name}[{idx}] exceeds register size {size}",
                        idx_at.0, idx_at.1
                    )))
                } else {
                    Ok(idx)
                }
            }
            _ => {
                let what = if classical { "classical" } else { "quantum" };
                Err(Error::Syntax {
                    line: at.0,
                    column: at.1,
                    message: format!("unknown {what} register `{name}`"),
                })
            }
        }
    }

    fn register(&mut self, classical: bool, at: (usize, usize)) -> Result<()> {
        let name = self.ident()?;
        self.expect_sym('[')?;
        let size = self.int()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        let slot = if classical { &mut self.creg } else { &mut self.qreg };
        if slot.is_some() {
            let what = if classical { "creg" } else { "qreg" };
            return self.unsupported(at, format!("more than one {what}"));
        }
        *slot = Some((name, size));
        Ok(())
    }

    fn statement(&mut self) -> Result<()> {
        let at = self.here();
        let word = match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) => s,
            _ => {
                self.pos -= 1;
                return self.syntax("expected statement");
            }
        };
        match word.as_str() {
            "OPENQASM" => {
                match self.next() {
                    Some(Token { tok: Tok::Num(v), .. }) if (v - 2.0).abs() < 1e-9 => {}
                    _ => return self.unsupported(at, "only OPENQASM 2.0 is accepted"),
                }
                self.expect_sym(';')
            }
            "include" => {
                match self.next() {
                    Some(Token { tok: Tok::Str(s), .. }) if s == "qelib1.inc" => {}
                    _ => return self.unsupported(at, "only `include \"qelib1.inc\"` is accepted"),
                }
                self.expect_sym(';')
            }
            "qreg" => self.register(false, at),
            "creg" => self.register(true, at),
            "measure" => {
                let q = self.qubit_arg()?;
                match self.next() {
                    Some(Token { tok: Tok::Arrow, .. }) => {}
                    _ => {
                        self.pos -= 1;
                        return self.syntax("expected `->`");
                    }
                }
                let c = self.indexed(true)?;
                self.expect_sym(';')?;
                self.gates.push(Gate::measure(q, c));
                Ok(())
            }
            "reset" => {
                let q = self.qubit_arg()?;
                self.expect_sym(';')?;
                self.gates.push(Gate::new(GateKind::Reset, &[q]));
                Ok(())
            }
            name => {
                let kind = match gate_from_qasm(name) {
                    Some(k) => k,
                    None => return self.unsupported(at, format!("`{name}`")),
                };
                let mut params = Vec::new();
                if self.eat_sym('(') && !self.eat_sym(')') {
                    params.push(self.expr()?);
                    while self.eat_sym(',') {
                        params.push(self.expr()?);
                    }
                    self.expect_sym(')')?;
                }
                if params.len() != kind.n_params() {
                    return self.syntax(format!(
                        "`{name}` takes {} parameter(s), got {}",
                        kind.n_params(),
                        params.len()
                    ));
                }
                let mut qubits = vec![self.qubit_arg()?];
                while self.eat_sym(',') {
                    qubits.push(self.qubit_arg()?);
                }
                self.expect_sym(';')?;
                if qubits.len() != kind.arity() {
                    return self.syntax(format!(
                        "`{name}` takes {} qubit(s), got {}",
                        kind.arity(),
                        qubits.len()
                    ));
                }
                if qubits.len() == 2 && qubits[0] == qubits[1] {
                    return self.syntax(format!("`{name}` repeats a qubit"));
                }
                self.gates.push(Gate {
                    params,
                    ..Gate::new(kind, &qubits)
                });
                Ok(())
            }
        }
    }

    fn qubit_arg(&mut self) -> Result<usize> {
        if self.qreg.is_none() {
            return self.syntax("gate before qreg declaration");
        }
        self.indexed(false)
    }
}

fn gate_from_qasm(name: &str) -> Option<GateKind> {
    Some(match name {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "t" => GateKind::T,
        "tdg" => GateKind::Tdg,
        "rx" => GateKind::RX,
        "ry" => GateKind::RY,
        "rz" => GateKind::RZ,
        "cx" | "CX" => GateKind::CX,
        "cz" => GateKind::CZ,
        _ => return None,
    })
}

pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let toks = lex(text)?;
    let end = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        qreg: None,
        creg: None,
        gates: Vec::new(),
    };
    while p.peek().is_some() {
        p.statement()?;
    }
    let (qname, n_qubits) = match p.qreg {
        Some(r) => r,
        None => {
            return Err(Error::Syntax {
                line: end.0,
                column: end.1,
                message: "missing qreg declaration".into(),
            })
        }
    };
    let _ = qname;
    let circuit = Circuit {
        name: "qasm".into(),
        n_qubits,
        n_clbits: p.creg.map(|(_, n)| n).unwrap_or(0),
        gates: p.gates,
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Serialize to the accepted subset. Conditioned and EPR-tagged gates have no
/// representation there and are rejected.
pub fn to_qasm(circuit: &Circuit) -> Result<String> {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", circuit.n_qubits);
    if circuit.n_clbits > 0 {
        let _ = writeln!(s, "creg c[{}];", circuit.n_clbits);
    }
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.condition.is_some() || g.epr_link {
            return Err(Error::InvalidParams(format!(
                "gate {i} carries a condition or EPR tag, which QASM output does not support"
            )));
        }
        match g.kind {
            GateKind::Measure => {
                let _ = writeln!(s, "measure q[{}] -> c[{}];", g.qubits[0], g.clbit.unwrap_or(0));
            }
            GateKind::Reset => {
                let _ = writeln!(s, "reset q[{}];", g.qubits[0]);
            }
            k => {
                let name = k.name().to_ascii_lowercase();
                let args: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
                if g.params.is_empty() {
                    let _ = writeln!(s, "{name} {};", args.join(","));
                } else {
                    let _ = writeln!(s, "{name}({:?}) {};", g.params[0], args.join(","));
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bell() {
        let c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.gates, vec![Gate::new(GateKind::H, &[0]), Gate::new(GateKind::CX, &[0, 1])]);
    }

    #[test]
    fn parses_measure() {
        let c = parse_qasm("qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0];").unwrap();
        assert_eq!(c.n_clbits, 1);
        assert_eq!(c.gates[1], Gate::measure(0, 0));
    }

    #[test]
    fn rejects_ccx() {
        let err = parse_qasm("qreg q[1]; ccx q[0],q[0],q[0];").unwrap_err();
        assert!(matches!(err, Error::Unsupported { line: 1, column: 12, .. }), "{err:?}");
    }

    #[test]
    fn header_comments_and_angles() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n// comment\nqreg q[1];\nrz(-pi/2) q[0];\nrx(0.5*pi) q[0];\nry(1e-3) q[0];";
        let c = parse_qasm(src).unwrap();
        assert!((c.gates[0].params[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((c.gates[1].params[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(c.gates[2].params[0], 1e-3);
    }

    #[test]
    fn error_positions() {
        match parse_qasm("qreg q[2];\nh q[0]\ncx q[0],q[1];") {
            Err(Error::Syntax { line: 3, column: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_qasm("qreg q[2];\nh q[5];"),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            parse_qasm("qreg q[2];\nqreg r[2];"),
            Err(Error::Unsupported { line: 2, .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2];\nbarrier q[0];"),
            Err(Error::Unsupported { .. })
        ));
        assert!(matches!(
            parse_qasm("qreg q[2];\nrx(theta) q[0];"),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn serialize_round_trip() {
        let src = "qreg q[3]; creg c[2]; h q[0]; rx(0.1) q[1]; cz q[1],q[2]; reset q[2]; measure q[0] -> c[1];";
        let c = parse_qasm(src).unwrap();
        let again = parse_qasm(&to_qasm(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }
}
