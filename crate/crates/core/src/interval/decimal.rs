//! Directed decimal printing and parsing of `f64` values.
//!
//! `fmt_up(x)` returns a decimal string whose exact value is `>= x`, and
//! `fmt_down` one whose value is `<= x`. The strings are the shortest
//! round-trip representation whenever that already lies on the right side,
//! otherwise the last digit is bumped outward.

use std::cmp::Ordering;

/// Sign, significant digits and decimal exponent of the first digit.
#[derive(Debug, Clone)]
struct Decimal {
    neg: bool,
    digits: Vec<u8>,
    exp: i64,
}

impl Decimal {
    fn parse(s: &str) -> Option<Decimal> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mant, exp10) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let mut digits = Vec::with_capacity(int_part.len() + frac_part.len());
        for b in int_part.bytes().chain(frac_part.bytes()) {
            if !b.is_ascii_digit() {
                return None;
            }
            digits.push(b - b'0');
        }
        // value = 0.d1d2d3... * 10^(int_len + exp10)
        let mut exp = int_part.len() as i64 + exp10;
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        digits.drain(..lead);
        exp -= lead as i64;
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Some(Decimal { neg, digits, exp })
    }

    fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    fn cmp_magnitude(&self, other: &Decimal) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        if self.exp != other.exp {
            return self.exp.cmp(&other.exp);
        }
        let n = self.digits.len().max(other.digits.len());
        for i in 0..n {
            let a = self.digits.get(i).copied().unwrap_or(0);
            let b = other.digits.get(i).copied().unwrap_or(0);
            if a != b {
                return a.cmp(&b);
            }
        }
        Ordering::Equal
    }

    fn cmp_value(&self, other: &Decimal) -> Ordering {
        let a_neg = self.neg && !self.is_zero();
        let b_neg = other.neg && !other.is_zero();
        match (a_neg, b_neg) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_magnitude(other),
            (true, true) => other.cmp_magnitude(self),
        }
    }

    /// Increase the magnitude by one unit in the last digit.
    fn bump_magnitude(&mut self) {
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.digits.insert(0, 1);
                self.exp += 1;
                break;
            }
            i -= 1;
            if self.digits[i] == 9 {
                self.digits[i] = 0;
            } else {
                self.digits[i] += 1;
                break;
            }
        }
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
    }

    fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        if self.neg {
            s.push('-');
        }
        s.push((b'0' + self.digits[0]) as char);
        if self.digits.len() > 1 {
            s.push('.');
            for &d in &self.digits[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push('e');
        s.push_str(&(self.exp - 1).to_string());
        s
    }
}

fn exact(x: f64) -> Decimal {
    Decimal::parse(&format!("{:.800e}", x)).expect("exact float rendering")
}

fn fmt_directed(x: f64, up: bool) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let short = Decimal::parse(&format!("{:e}", x)).expect("shortest rendering");
    let ord = short.cmp_value(&exact(x));
    let ok = match ord {
        Ordering::Equal => true,
        Ordering::Greater => up,
        Ordering::Less => !up,
    };
    if ok {
        return short.render();
    }
    // truncating the exact expansion moves toward zero; bumping the last
    // kept digit then moves past |x|
    let full = exact(x);
    let mut t = full.clone();
    t.digits.truncate(17);
    let lossy = t.digits.len() < full.digits.len();
    if up == (x > 0.0) && lossy {
        t.bump_magnitude();
    }
    while t.digits.last() == Some(&0) {
        t.digits.pop();
    }
    t.render()
}

/// Decimal string with exact value `>= x`.
pub fn fmt_up(x: f64) -> String {
    fmt_directed(x, true)
}

/// Decimal string with exact value `<= x`.
pub fn fmt_down(x: f64) -> String {
    fmt_directed(x, false)
}

fn parse_special(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "infinity" | "Infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" | "-Infinity" => Some(f64::NEG_INFINITY),
        _ => None,
    }
}

/// Largest `f64` not exceeding the decimal value of `s`.
pub fn parse_down(s: &str) -> Option<f64> {
    if let Some(v) = parse_special(s) {
        return Some(v);
    }
    let d = Decimal::parse(s)?;
    let x: f64 = s.trim().parse().ok()?;
    if x.is_infinite() {
        return Some(if x > 0.0 { f64::MAX } else { x });
    }
    Some(if exact(x).cmp_value(&d) == Ordering::Greater { x.next_down() } else { x })
}

/// Smallest `f64` not below the decimal value of `s`.
pub fn parse_up(s: &str) -> Option<f64> {
    if let Some(v) = parse_special(s) {
        return Some(v);
    }
    let d = Decimal::parse(s)?;
    let x: f64 = s.trim().parse().ok()?;
    if x.is_infinite() {
        return Some(if x < 0.0 { -f64::MAX } else { x });
    }
    Some(if exact(x).cmp_value(&d) == Ordering::Less { x.next_up() } else { x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenth_is_directed() {
        // 0.1 is stored slightly above 1/10
        assert_eq!(fmt_down(0.1), "1e-1");
        assert_eq!(fmt_up(0.1), "1.0000000000000001e-1");
        assert_eq!(parse_down("0.1"), Some(0.1f64.next_down()));
        assert_eq!(parse_up("0.1"), Some(0.1));
    }

    #[test]
    fn exact_values_round_trip() {
        for x in [1.0, -2.5, 0.75, 1024.0, -0.015625] {
            assert_eq!(parse_down(&fmt_down(x)), Some(x));
            assert_eq!(parse_up(&fmt_up(x)), Some(x));
        }
    }

    #[test]
    fn negative_values_flip_direction() {
        assert_eq!(fmt_up(-0.1), "-1e-1");
        assert_eq!(fmt_down(-0.1), "-1.0000000000000001e-1");
        // shortest form of 0.3 lies below the stored value
        let up = Decimal::parse(&fmt_up(-0.3)).unwrap();
        assert_ne!(up.cmp_value(&exact(-0.3)), Ordering::Less);
        let down = Decimal::parse(&fmt_down(0.7)).unwrap();
        assert_ne!(down.cmp_value(&exact(0.7)), Ordering::Greater);
    }

    #[test]
    fn carry_propagates() {
        let mut d = Decimal::parse("9.99e2").unwrap();
        d.bump_magnitude();
        assert_eq!(d.render(), "1e3");
    }

    #[test]
    fn directed_strings_bracket_value() {
        let mut x = 0.123_456_789_f64;
        for _ in 0..200 {
            x = x * 1.37 + 1e-3;
            let up = Decimal::parse(&fmt_up(x)).unwrap();
            let down = Decimal::parse(&fmt_down(x)).unwrap();
            assert_ne!(up.cmp_value(&exact(x)), Ordering::Less);
            assert_ne!(down.cmp_value(&exact(x)), Ordering::Greater);
            let pu = parse_up(&fmt_up(x)).unwrap();
            let pd = parse_down(&fmt_down(x)).unwrap();
            assert!(pd <= x && x <= pu);
        }
    }
}
