/// Two-decimal display text: round half up (away from zero) applied to the
/// shortest decimal representation of `v`, so `1.035` renders as `"1.04"`
/// even though its binary value sits slightly below the midpoint.
pub fn display_value(v: f64) -> String {
    assert!(v.is_finite(), "display_value needs a finite value");
    let text = format!("{}", v.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let frac = frac_part.as_bytes();
    let digit = |i: usize| frac.get(i).map_or(0, |b| b - b'0');

    // All kept digits, most significant first, with two fractional digits.
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    digits.push(digit(0));
    digits.push(digit(1));
    if digit(2) >= 5 {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let int_text: String = digits[..split].iter().map(|d| (b'0' + d) as char).collect();
    let frac_text: String = digits[split..].iter().map(|d| (b'0' + d) as char).collect();
    let negative = v < 0.0 && digits.iter().any(|&d| d != 0);
    format!("{}{}.{}", if negative { "-" } else { "" }, int_text, frac_text)
}

/// Counts render as plain integers.
pub fn display_count(n: usize) -> String {
    n.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_on_decimal_text() {
        assert_eq!(display_value(1.035), "1.04");
        assert_eq!(display_value(1.0349), "1.03");
        assert_eq!(display_value(3.812688), "3.81");
        assert_eq!(display_value(2.675), "2.68");
        assert_eq!(display_value(0.005), "0.01");
        assert_eq!(display_value(0.0049), "0.00");
    }

    #[test]
    fn carries() {
        assert_eq!(display_value(9.995), "10.00");
        assert_eq!(display_value(99.999), "100.00");
        assert_eq!(display_value(0.0), "0.00");
        assert_eq!(display_value(7.0), "7.00");
    }

    #[test]
    fn negatives_round_away_from_zero() {
        assert_eq!(display_value(-1.035), "-1.04");
        assert_eq!(display_value(-0.001), "0.00");
    }

    #[test]
    fn counts_are_integers() {
        assert_eq!(display_count(2), "2");
    }
}
