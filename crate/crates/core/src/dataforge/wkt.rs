//! Minimal WKT reader for single-ring `POLYGON` footprints.

use crate::error::{Error, Result};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected '{}', found '{}'", b as char, c as char))),
            None => Err(self.err(format!("expected '{}', found end of input", b as char))),
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        if i < s.len() && (s[i] == b'+' || s[i] == b'-') {
            i += 1;
        }
        let mut digits = 0;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            return Err(self.err("expected a number"));
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let exp_start = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j == exp_start {
                self.pos = j;
                return Err(self.err("malformed exponent"));
            }
            i = j;
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| self.err(format!("bad number `{text}`")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite coordinate `{text}`")));
        }
        self.pos = i;
        Ok(v)
    }
}

/// Parses `POLYGON ((x y, x y, ...))` into its outer-ring vertices.
///
/// A trailing vertex equal to the first one is dropped. Interior rings,
/// multi-geometries and 3D/measured coordinates are rejected.
pub fn parse_wkt_polygon(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut cur = Cursor {
        src: text.as_bytes(),
        pos: 0,
    };
    let kw_offset = {
        cur.skip_ws();
        cur.pos
    };
    let kw = cur.word();
    if kw.eq_ignore_ascii_case("MULTIPOLYGON") || kw.eq_ignore_ascii_case("GEOMETRYCOLLECTION") {
        return Err(Error::UnsupportedGeometry(format!("{kw} is not supported")));
    }
    if !kw.eq_ignore_ascii_case("POLYGON") {
        return Err(Error::Parse {
            offset: kw_offset,
            message: format!("expected POLYGON, found `{kw}`"),
        });
    }
    if matches!(cur.peek(), Some(c) if c.is_ascii_alphabetic()) {
        let tag = cur.word();
        if tag.eq_ignore_ascii_case("EMPTY") {
            return Err(Error::DegenerateGeometry("POLYGON EMPTY".into()));
        }
        return Err(Error::UnsupportedGeometry(format!("POLYGON {tag}")));
    }
    cur.expect(b'(')?;
    let ring_offset = {
        cur.skip_ws();
        cur.pos
    };
    cur.expect(b'(')?;
    let mut ring = Vec::new();
    loop {
        let x = cur.number()?;
        let y = cur.number()?;
        ring.push((x, y));
        match cur.peek() {
            Some(b',') => cur.pos += 1,
            Some(b')') => {
                cur.pos += 1;
                break;
            }
            Some(c) if c == b'-' || c == b'+' || c == b'.' || c.is_ascii_digit() => {
                return Err(Error::UnsupportedGeometry(
                    "coordinates with more than two ordinates".into(),
                ))
            }
            Some(c) => return Err(cur.err(format!("unexpected '{}' in ring", c as char))),
            None => return Err(cur.err("unterminated ring")),
        }
    }
    match cur.peek() {
        Some(b')') => cur.pos += 1,
        Some(b',') => return Err(Error::UnsupportedGeometry("polygon with interior rings".into())),
        Some(c) => return Err(cur.err(format!("unexpected '{}' after ring", c as char))),
        None => return Err(cur.err("unterminated polygon")),
    }
    if cur.peek().is_some() {
        return Err(cur.err("trailing characters after polygon"));
    }

    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for p in &ring {
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "ring at byte {ring_offset} has {} distinct vertices, need at least 3",
            distinct.len()
        )));
    }
    Ok(ring)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_square() {
        let v = parse_wkt_polygon("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))").unwrap();
        assert_eq!(v, vec![(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]);
    }

    #[test]
    fn open_triangle_with_reals() {
        let v = parse_wkt_polygon("POLYGON((1.5 2.25, 3 2, 2 5))").unwrap();
        assert_eq!(v, vec![(1.5, 2.25), (3.0, 2.0), (2.0, 5.0)]);
    }

    #[test]
    fn lowercase_exponent_and_signs() {
        let v = parse_wkt_polygon("  polygon (( -1e1 +2 , 3.5E-1 .5,7 8 ,-1e1 +2 ))  ").unwrap();
        assert_eq!(v, vec![(-10.0, 2.0), (0.35, 0.5), (7.0, 8.0)]);
    }

    #[test]
    fn degenerate_ring() {
        assert!(matches!(
            parse_wkt_polygon("POLYGON ((0 0, 1 0))"),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            parse_wkt_polygon("POLYGON ((0 0, 1 0, 0 0, 1 0))"),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn unsupported_geometries() {
        for text in [
            "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)))",
            "POLYGON ((0 0, 9 0, 9 9, 0 0), (1 1, 2 1, 2 2, 1 1))",
            "POLYGON Z ((0 0 0, 1 0 0, 1 1 0))",
            "POLYGON ((0 0 0, 1 0 0, 1 1 0))",
        ] {
            assert!(
                matches!(parse_wkt_polygon(text), Err(Error::UnsupportedGeometry(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn malformed_reports_offset() {
        match parse_wkt_polygon("POLYGON ((0 0, 1 x, 1 1))") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 17),
            other => panic!("{other:?}"),
        }
        match parse_wkt_polygon("POINT (1 2)") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_wkt_polygon("POLYGON ((0 0, 1 0, 1 1)) junk"),
            Err(Error::Parse { offset: 26, .. })
        ));
        assert!(matches!(
            parse_wkt_polygon("POLYGON ((0 0, 1 0, 1 1"),
            Err(Error::Parse { .. })
        ));
    }
}
