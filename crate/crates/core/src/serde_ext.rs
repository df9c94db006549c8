//! Serde helpers for exponents that may be infinite.

/// Formats an exponent, writing `inf` for `+∞`.
pub fn fmt_exponent(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Parses `inf`, `infinity`, a decimal or a fraction `a/b`.
pub fn parse_exponent(text: &str) -> Option<f64> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => return Some(f64::INFINITY),
        _ => {}
    }
    if let Some((a, b)) = t.split_once('/') {
        let a: f64 = a.trim().parse().ok()?;
        let b: f64 = b.trim().parse().ok()?;
        return (b != 0.0).then_some(a / b);
    }
    t.parse().ok()
}

/// Accepts numbers or the strings understood by [`parse_exponent`].
pub mod extended_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::fmt_exponent(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, a fraction string or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                super::parse_exponent(v)
                    .ok_or_else(|| E::custom(format!("cannot parse exponent `{v}`")))
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_exponent("inf"), Some(f64::INFINITY));
        assert_eq!(parse_exponent("5/2"), Some(2.5));
        assert_eq!(parse_exponent(" 3 "), Some(3.0));
        assert_eq!(parse_exponent("1/0"), None);
        assert_eq!(parse_exponent("x"), None);
        assert_eq!(fmt_exponent(f64::INFINITY), "inf");
        assert_eq!(fmt_exponent(2.0), "2");
    }

    #[test]
    fn json_roundtrip() {
        #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
        struct W {
            #[serde(with = "extended_f64")]
            p: f64,
        }
        let w = W { p: f64::INFINITY };
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"p":"inf"}"#);
        assert_eq!(serde_json::from_str::<W>(&text).unwrap(), w);
        assert_eq!(serde_json::from_str::<W>(r#"{"p":2}"#).unwrap().p, 2.0);
    }
}
