use std::fmt;
use std::str::FromStr;

/// Inclusive range of board sides, written `3-8` or `5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
}

impl Span {
    pub fn iter(self) -> impl Iterator<Item = u32> {
        self.lo..=self.hi
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Span, String> {
        let side = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad board side `{t}` in `{s}`"))
        };
        let (lo, hi) = match s.split_once('-') {
            Some((lo, hi)) => (side(lo)?, side(hi)?),
            None => {
                let v = side(s)?;
                (v, v)
            }
        };
        if lo == 0 || lo > hi {
            return Err(format!("range `{s}` must satisfy 1 <= low <= high"));
        }
        Ok(Span { lo, hi })
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}-{}", self.lo, self.hi)
        }
    }
}
