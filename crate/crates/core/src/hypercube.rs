//! Boolean functions on `{0,1}^n` stored as packed truth tables.
//!
//! A point is an integer `x` in `[0, 2^n)`. Coordinate `i` (1-based) is bit
//! `i - 1` of `x`, so coordinate 1 is the least significant bit. The same
//! convention is used by the hex serialization and every CSV column.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest arity handled by dense tables unless a caller raises the cap.
pub const DEFAULT_MAX_ARITY: usize = 24;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: usize,
    words: Vec<u64>,
}

fn word_count(n: usize) -> usize {
    (1usize << n).div_ceil(64)
}

fn check_arity(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ArityTooSmall { n, min: 1 });
    }
    if n > cap {
        return Err(Error::ArityCap { n, cap });
    }
    Ok(())
}

impl BooleanFunction {
    pub fn from_bits(n: usize, bits: &[bool]) -> Result<Self> {
        Self::from_bits_capped(n, bits, DEFAULT_MAX_ARITY)
    }

    pub fn from_bits_capped(n: usize, bits: &[bool], cap: usize) -> Result<Self> {
        check_arity(n, cap)?;
        let expected = 1usize << n;
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                n,
                expected,
                got: bits.len(),
            });
        }
        Ok(Self::from_fn_unchecked(n, |x| bits[x]))
    }

    /// Builds the table by evaluating `rule` at every point.
    pub fn from_fn(n: usize, rule: impl Fn(usize) -> bool) -> Result<Self> {
        Self::from_fn_capped(n, rule, DEFAULT_MAX_ARITY)
    }

    pub fn from_fn_capped(n: usize, rule: impl Fn(usize) -> bool, cap: usize) -> Result<Self> {
        check_arity(n, cap)?;
        Ok(Self::from_fn_unchecked(n, rule))
    }

    fn from_fn_unchecked(n: usize, rule: impl Fn(usize) -> bool) -> Self {
        let mut words = vec![0u64; word_count(n)];
        for x in 0..(1usize << n) {
            if rule(x) {
                words[x >> 6] |= 1 << (x & 63);
            }
        }
        BooleanFunction { n, words }
    }

    /// Builds a function from the low `2^n` bits of packed words.
    pub fn from_words(n: usize, words: Vec<u64>) -> Result<Self> {
        check_arity(n, DEFAULT_MAX_ARITY)?;
        let expected = word_count(n);
        if words.len() != expected {
            return Err(Error::LengthMismatch {
                n,
                expected: 1 << n,
                got: words.len() * 64,
            });
        }
        let mut f = BooleanFunction { n, words };
        f.mask_tail();
        Ok(f)
    }

    fn mask_tail(&mut self) {
        let len = 1usize << self.n;
        if len < 64 {
            self.words[0] &= (1u64 << len) - 1;
        }
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        Self::from_fn(n, |_| value)
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.n
    }

    /// Number of points, `2^n`.
    #[inline]
    pub fn len(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        (self.words[x >> 6] >> (x & 63)) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|x| self.get(x)).collect()
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// `profile[w]` is the number of points of Hamming weight `w` in the set.
    pub fn weight_profile(&self) -> Vec<u64> {
        let mut profile = vec![0u64; self.n + 1];
        for x in 0..self.len() {
            if self.get(x) {
                profile[x.count_ones() as usize] += 1;
            }
        }
        profile
    }

    pub fn is_constant(&self) -> bool {
        let ones = self.count_ones();
        ones == 0 || ones == self.len() as u64
    }

    /// True iff flipping any coordinate from 0 to 1 never leaves the set.
    ///
    /// Checking single-coordinate edges is enough: every comparable pair is
    /// joined by a chain of such edges.
    pub fn is_monotone(&self) -> bool {
        for i in 0..self.n {
            let bit = 1usize << i;
            for x in 0..self.len() {
                if x & bit == 0 && self.get(x) && !self.get(x | bit) {
                    return false;
                }
            }
        }
        true
    }

    /// True iff the value depends only on the Hamming weight.
    pub fn is_fully_symmetric(&self) -> bool {
        let mut seen: Vec<Option<bool>> = vec![None; self.n + 1];
        for x in 0..self.len() {
            let w = x.count_ones() as usize;
            let v = self.get(x);
            match seen[w] {
                None => seen[w] = Some(v),
                Some(prev) if prev != v => return false,
                _ => {}
            }
        }
        true
    }

    /// Returns `(invariant, transitive)` for the group generated by `gens`.
    pub fn is_invariant_and_transitive(
        &self,
        gens: &PermutationGenerators,
    ) -> Result<(bool, bool)> {
        if gens.arity() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: gens.arity(),
            });
        }
        let invariant = gens
            .generators()
            .iter()
            .all(|g| (0..self.len()).all(|x| self.get(g.act(x)) == self.get(x)));
        Ok((invariant, gens.is_transitive()))
    }

    /// Serializes as `n=<arity>:hex=<digits>`.
    ///
    /// The digits are the integer `sum f(x) 2^x` in ordinary hex notation,
    /// zero-padded to `max(1, 2^n / 4)` digits.
    pub fn to_hex_string(&self) -> String {
        let digits = (self.len() / 4).max(1);
        let mut out = String::with_capacity(digits + 8);
        out.push_str(&format!("n={}:hex=", self.n));
        for d in (0..digits).rev() {
            let mut nibble = 0u32;
            for b in 0..4 {
                let x = d * 4 + b;
                if x < self.len() && self.get(x) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble, 16).unwrap().to_ascii_uppercase());
        }
        out
    }

    pub fn parse_hex(s: &str) -> Result<Self> {
        Self::parse_hex_capped(s, DEFAULT_MAX_ARITY)
    }

    pub fn parse_hex_capped(s: &str, cap: usize) -> Result<Self> {
        let bad = || Error::Parse(format!("expected `n=<arity>:hex=<digits>`, got `{s}`"));
        let (n_part, hex_part) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: usize = n_part
            .strip_prefix("n=")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        let hex = hex_part.strip_prefix("hex=").ok_or_else(bad)?;
        check_arity(n, cap)?;
        let len = 1usize << n;
        let digits = (len / 4).max(1);
        if hex.len() != digits {
            return Err(Error::LengthMismatch {
                n,
                expected: len,
                got: hex.len() * 4,
            });
        }
        let mut bits = vec![false; len];
        for (pos, c) in hex.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit `{c}`")))?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let x = pos * 4 + b;
                    if x >= len {
                        return Err(Error::Parse(format!(
                            "hex value has bits beyond the 2^{n} table"
                        )));
                    }
                    bits[x] = true;
                }
            }
        }
        Self::from_bits_capped(n, &bits, cap)
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({})", self.to_hex_string())
    }
}

impl FromStr for BooleanFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_hex(s)
    }
}

/// A permutation of the coordinates, stored 0-based as `i -> g(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &j in &images {
            if j >= n || seen[j] {
                return Err(Error::BadPermutation(format!(
                    "{images:?} is not a bijection"
                )));
            }
            seen[j] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation from 1-based disjoint cycles, e.g. `[[1, 3], [2, 4]]`.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                if a == 0 || a > n {
                    return Err(Error::BadPermutation(format!("point {a} outside 1..={n}")));
                }
                if touched[a - 1] {
                    return Err(Error::BadPermutation(format!("point {a} appears twice")));
                }
                touched[a - 1] = true;
                let b = cycle[(k + 1) % cycle.len()];
                if b == 0 || b > n {
                    return Err(Error::BadPermutation(format!("point {b} outside 1..={n}")));
                }
                images[a - 1] = b - 1;
            }
        }
        Self::from_images(images)
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        Self::from_cycles(n, &[vec![a, b]])
    }

    /// The shift `i -> i + 1 (mod n)`.
    pub fn cyclic_shift(n: usize) -> Self {
        Permutation {
            images: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.images.len()
    }

    /// 0-based image of coordinate `i`.
    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `g . x`, where coordinate `i` of `x` moves to coordinate `g(i)`.
    pub fn act(&self, x: usize) -> usize {
        let mut y = 0usize;
        for (i, &gi) in self.images.iter().enumerate() {
            y |= ((x >> i) & 1) << gi;
        }
        y
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation, 1-based, fixed points omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.arity();
        let mut done = vec![false; n];
        let mut wrote = false;
        for start in 0..n {
            if done[start] || self.images[start] == start {
                continue;
            }
            write!(f, "(")?;
            let mut i = start;
            let mut first = true;
            while !done[i] {
                done[i] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}", i + 1)?;
                first = false;
                i = self.images[i];
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGenerators {
    n: usize,
    gens: Vec<Permutation>,
}

impl PermutationGenerators {
    pub fn new(n: usize, gens: Vec<Permutation>) -> Result<Self> {
        for g in &gens {
            if g.arity() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    got: g.arity(),
                });
            }
        }
        Ok(PermutationGenerators { n, gens })
    }

    /// Parses comma-separated generators in 1-based cycle notation,
    /// e.g. `"(1 2),(3 4),(1 3)(2 4)"`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let mut gens = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let mut cycles = Vec::new();
            let mut rest = part;
            while let Some(open) = rest.find('(') {
                let close = rest[open..]
                    .find(')')
                    .ok_or_else(|| Error::BadPermutation(format!("unclosed cycle in `{part}`")))?
                    + open;
                let cycle = rest[open + 1..close]
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::BadPermutation(format!("bad point `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if !cycle.is_empty() {
                    cycles.push(cycle);
                }
                rest = &rest[close + 1..];
            }
            if !rest.trim().is_empty() {
                return Err(Error::BadPermutation(format!("trailing text in `{part}`")));
            }
            gens.push(Permutation::from_cycles(n, &cycles)?);
        }
        Self::new(n, gens)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    /// Single orbit test by union-find over the edges `i ~ g(i)`.
    pub fn is_transitive(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for g in &self.gens {
            for i in 0..self.n {
                let (a, b) = (find(&mut parent, i), find(&mut parent, g.image(i)));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, 0);
        (1..self.n).all(|i| find(&mut parent, i) == root)
    }

    /// The transposition `(1 2)` together with the full cycle; generates S_n.
    pub fn symmetric_group(n: usize) -> Self {
        let mut gens = vec![Permutation::cyclic_shift(n)];
        if n >= 2 {
            gens.push(Permutation::transposition(n, 1, 2).unwrap());
        }
        PermutationGenerators { n, gens }
    }

    pub fn cyclic_group(n: usize) -> Self {
        PermutationGenerators {
            n,
            gens: vec![Permutation::cyclic_shift(n)],
        }
    }

    /// Adjacent swaps inside each block of `k` plus the shift of whole blocks.
    pub fn tribes_group(k: usize, m: usize) -> Self {
        let n = k * m;
        let mut gens = Vec::new();
        for block in 0..m {
            for j in 1..k {
                let a = block * k + j;
                gens.push(Permutation::transposition(n, a, a + 1).unwrap());
            }
        }
        if m >= 2 {
            let images = (0..n).map(|i| (i + k) % n).collect();
            gens.push(Permutation::from_images(images).unwrap());
        }
        PermutationGenerators { n, gens }
    }
}

impl fmt::Display for PermutationGenerators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.gens.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// The built-in example families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    /// `f(x) = x_i`.
    Dictator {
        n: usize,
        i: usize,
    },
    AndAll {
        n: usize,
    },
    /// The "at least one coordinate is 1" set.
    OrAll {
        n: usize,
    },
    Majority {
        n: usize,
    },
    Parity {
        n: usize,
    },
    /// OR over `m` disjoint blocks of the AND of each block's `k` coordinates.
    Tribes {
        k: usize,
        m: usize,
    },
    /// 1 iff some `len` cyclically consecutive coordinates are all 1.
    CyclicRun {
        n: usize,
        len: usize,
    },
}

impl FamilySpec {
    pub fn arity(&self) -> usize {
        match *self {
            FamilySpec::Dictator { n, .. }
            | FamilySpec::AndAll { n }
            | FamilySpec::OrAll { n }
            | FamilySpec::Majority { n }
            | FamilySpec::Parity { n }
            | FamilySpec::CyclicRun { n, .. } => n,
            FamilySpec::Tribes { k, m } => k * m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadFamily(msg));
        match *self {
            FamilySpec::Dictator { n, i } if i == 0 || i > n => {
                bad(format!("dictator coordinate {i} outside 1..={n}"))
            }
            FamilySpec::Majority { n } if n % 2 == 0 => {
                bad(format!("majority needs odd n, got {n}"))
            }
            FamilySpec::Tribes { k, m } if k == 0 || m == 0 => {
                bad(format!("tribes needs k, m >= 1, got k={k}, m={m}"))
            }
            FamilySpec::CyclicRun { n, len } if len == 0 || len > n => bad(format!(
                "cyclic_run needs 1 <= len <= n, got len={len}, n={n}"
            )),
            _ if self.arity() == 0 => bad("arity must be at least 1".into()),
            _ => Ok(()),
        }
    }

    /// Evaluates the family at a dense point index.
    pub fn eval(&self, x: usize) -> bool {
        match *self {
            FamilySpec::Dictator { i, .. } => (x >> (i - 1)) & 1 == 1,
            FamilySpec::AndAll { n } => x.count_ones() as usize == n,
            FamilySpec::OrAll { .. } => x != 0,
            FamilySpec::Majority { n } => 2 * x.count_ones() as usize > n,
            FamilySpec::Parity { .. } => x.count_ones() % 2 == 1,
            FamilySpec::Tribes { k, m } => {
                let block = (1usize << k) - 1;
                (0..m).any(|b| (x >> (b * k)) & block == block)
            }
            FamilySpec::CyclicRun { n, len } => {
                (0..n).any(|start| (0..len).all(|off| (x >> ((start + off) % n)) & 1 == 1))
            }
        }
    }

    pub fn instance(&self) -> Result<BooleanFunction> {
        self.instance_capped(DEFAULT_MAX_ARITY)
    }

    pub fn instance_capped(&self, cap: usize) -> Result<BooleanFunction> {
        self.validate()?;
        BooleanFunction::from_fn_capped(self.arity(), |x| self.eval(x), cap)
    }

    /// A generating set of a transitive group leaving the family invariant.
    pub fn symmetry_generators(&self) -> Option<PermutationGenerators> {
        match *self {
            FamilySpec::Dictator { n, .. } => {
                (n == 1).then(|| PermutationGenerators::symmetric_group(1))
            }
            FamilySpec::AndAll { n }
            | FamilySpec::OrAll { n }
            | FamilySpec::Majority { n }
            | FamilySpec::Parity { n } => Some(PermutationGenerators::symmetric_group(n)),
            FamilySpec::Tribes { k, m } => Some(PermutationGenerators::tribes_group(k, m)),
            FamilySpec::CyclicRun { n, .. } => Some(PermutationGenerators::cyclic_group(n)),
        }
    }

    /// True for the families whose `mu_p` has a closed form at any arity.
    pub fn has_closed_form(&self) -> bool {
        matches!(
            self,
            FamilySpec::Dictator { .. }
                | FamilySpec::AndAll { .. }
                | FamilySpec::OrAll { .. }
                | FamilySpec::Tribes { .. }
        )
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Dictator { n, i } => write!(f, "dictator:n={n},i={i}"),
            FamilySpec::AndAll { n } => write!(f, "and:n={n}"),
            FamilySpec::OrAll { n } => write!(f, "or:n={n}"),
            FamilySpec::Majority { n } => write!(f, "majority:n={n}"),
            FamilySpec::Parity { n } => write!(f, "parity:n={n}"),
            FamilySpec::Tribes { k, m } => write!(f, "tribes:k={k},m={m}"),
            FamilySpec::CyclicRun { n, len } => write!(f, "cyclic_run:n={n},len={len}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// Parses `name:key=value,...`, the form produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut n = None;
        let mut i = None;
        let mut k = None;
        let mut m = None;
        let mut len = None;
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::BadFamily(format!("expected key=value, got `{kv}`")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::BadFamily(format!("bad value in `{kv}`")))?;
            match key.trim() {
                "n" => n = Some(value),
                "i" => i = Some(value),
                "k" => k = Some(value),
                "m" => m = Some(value),
                "len" => len = Some(value),
                other => return Err(Error::BadFamily(format!("unknown key `{other}`"))),
            }
        }
        FamilySpec::from_parts(name, n, i, k, m, len)
    }
}

impl FamilySpec {
    /// Assembles a spec from a family name and optional parameters.
    pub fn from_parts(
        name: &str,
        n: Option<usize>,
        i: Option<usize>,
        k: Option<usize>,
        m: Option<usize>,
        len: Option<usize>,
    ) -> Result<Self> {
        let need = |v: Option<usize>, key: &str| {
            v.ok_or_else(|| Error::BadFamily(format!("family `{name}` needs `{key}`")))
        };
        let spec = match name {
            "dictator" => FamilySpec::Dictator {
                n: need(n, "n")?,
                i: i.unwrap_or(1),
            },
            "and" | "and_all" => FamilySpec::AndAll { n: need(n, "n")? },
            "or" | "or_all" | "bn" => FamilySpec::OrAll { n: need(n, "n")? },
            "majority" | "maj" => FamilySpec::Majority { n: need(n, "n")? },
            "parity" | "xor" => FamilySpec::Parity { n: need(n, "n")? },
            "tribes" => FamilySpec::Tribes {
                k: need(k, "k")?,
                m: need(m, "m")?,
            },
            "cyclic_run" | "cyclic-run" => FamilySpec::CyclicRun {
                n: need(n, "n")?,
                len: need(len, "len")?,
            },
            other => return Err(Error::BadFamily(format!("unknown family `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, bits: &[u8]) -> Result<BooleanFunction> {
        let bits: Vec<bool> = bits.iter().map(|&b| b == 1).collect();
        BooleanFunction::from_bits(n, &bits)
    }

    #[test]
    fn from_table_examples() {
        let d = table(1, &[0, 1]).unwrap();
        assert_eq!(d, FamilySpec::Dictator { n: 1, i: 1 }.instance().unwrap());
        let or2 = table(2, &[0, 1, 1, 1]).unwrap();
        assert_eq!(or2, FamilySpec::OrAll { n: 2 }.instance().unwrap());
        assert!(matches!(
            table(2, &[0, 1, 1]),
            Err(Error::LengthMismatch {
                expected: 4,
                got: 3,
                ..
            })
        ));
    }

    #[test]
    fn arity_cap_is_enforced_and_overridable() {
        assert!(matches!(
            BooleanFunction::from_fn(DEFAULT_MAX_ARITY + 1, |_| false),
            Err(Error::ArityCap { .. })
        ));
        assert!(BooleanFunction::from_fn_capped(3, |_| true, 2).is_err());
        assert!(BooleanFunction::from_fn(0, |_| true).is_err());
    }

    #[test]
    fn family_tables() {
        assert_eq!(
            FamilySpec::OrAll { n: 2 }.instance().unwrap().bits(),
            vec![false, true, true, true]
        );
        let t = FamilySpec::Tribes { k: 2, m: 2 }.instance().unwrap();
        assert_eq!(t.len(), 16);
        for x in 0..16usize {
            let b = |i: usize| (x >> (i - 1)) & 1 == 1;
            assert_eq!(t.get(x), (b(1) && b(2)) || (b(3) && b(4)));
        }
        let maj = FamilySpec::Majority { n: 3 }.instance().unwrap();
        for x in 0..8usize {
            assert_eq!(maj.get(x), x.count_ones() >= 2);
        }
        let run = FamilySpec::CyclicRun { n: 5, len: 2 }.instance().unwrap();
        assert!(run.get(0b10001));
        assert!(run.get(0b10101));
        assert!(!run.get(0b01010));
    }

    #[test]
    fn malformed_families() {
        assert!(FamilySpec::Majority { n: 4 }.instance().is_err());
        assert!(FamilySpec::CyclicRun { n: 3, len: 4 }.instance().is_err());
        assert!(FamilySpec::CyclicRun { n: 3, len: 0 }.instance().is_err());
        assert!(FamilySpec::Dictator { n: 3, i: 4 }.instance().is_err());
        assert!(FamilySpec::Tribes { k: 0, m: 2 }.instance().is_err());
        assert!("tribes:k=2".parse::<FamilySpec>().is_err());
        assert!("wibble:n=2".parse::<FamilySpec>().is_err());
    }

    #[test]
    fn family_spec_strings_round_trip() {
        for s in [
            "dictator:n=4,i=2",
            "and:n=3",
            "or:n=8",
            "majority:n=9",
            "parity:n=3",
            "tribes:k=2,m=3",
            "cyclic_run:n=12,len=3",
        ] {
            assert_eq!(s.parse::<FamilySpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn monotonicity_examples() {
        assert!(FamilySpec::OrAll { n: 2 }.instance().unwrap().is_monotone());
        assert!(!FamilySpec::Parity { n: 2 }
            .instance()
            .unwrap()
            .is_monotone());
        for n in 1..6 {
            assert!(FamilySpec::Dictator { n, i: 1 }
                .instance()
                .unwrap()
                .is_monotone());
        }
    }

    #[test]
    fn symmetry_examples() {
        assert!(FamilySpec::OrAll { n: 5 }
            .instance()
            .unwrap()
            .is_fully_symmetric());
        assert!(!FamilySpec::Dictator { n: 2, i: 1 }
            .instance()
            .unwrap()
            .is_fully_symmetric());
        assert!(FamilySpec::Majority { n: 3 }
            .instance()
            .unwrap()
            .is_fully_symmetric());

        let tribes = FamilySpec::Tribes { k: 2, m: 2 }.instance().unwrap();
        let gens = PermutationGenerators::parse(4, "(1 2),(3 4),(1 3)(2 4)").unwrap();
        assert_eq!(
            tribes.is_invariant_and_transitive(&gens).unwrap(),
            (true, true)
        );

        let dict = FamilySpec::Dictator { n: 4, i: 1 }.instance().unwrap();
        let shift = PermutationGenerators::cyclic_group(4);
        assert_eq!(
            dict.is_invariant_and_transitive(&shift).unwrap(),
            (false, true)
        );

        let run = FamilySpec::CyclicRun { n: 5, len: 2 }.instance().unwrap();
        let shift = PermutationGenerators::cyclic_group(5);
        assert_eq!(
            run.is_invariant_and_transitive(&shift).unwrap(),
            (true, true)
        );

        assert!(matches!(
            run.is_invariant_and_transitive(&PermutationGenerators::cyclic_group(4)),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn transitivity_needs_connecting_generators() {
        let gens = PermutationGenerators::parse(4, "(1 2),(3 4)").unwrap();
        assert!(!gens.is_transitive());
        assert!(PermutationGenerators::tribes_group(3, 4).is_transitive());
        assert!(PermutationGenerators::symmetric_group(7).is_transitive());
    }

    #[test]
    fn permutation_action_moves_coordinates() {
        // (1 2 3): coordinate 1 goes to position 2
        let g = Permutation::from_cycles(3, &[vec![1, 2, 3]]).unwrap();
        assert_eq!(g.act(0b001), 0b010);
        assert_eq!(g.act(0b100), 0b001);
        assert_eq!(g.to_string(), "(1 2 3)");
        assert!(Permutation::from_cycles(3, &[vec![1, 4]]).is_err());
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn hex_format() {
        let or2 = BooleanFunction::parse_hex("n=2:hex=E").unwrap();
        assert_eq!(or2.bits(), vec![false, true, true, true]);
        assert_eq!(or2.to_hex_string(), "n=2:hex=E");
        let d = BooleanFunction::parse_hex("n=1:hex=2").unwrap();
        assert_eq!(d.bits(), vec![false, true]);
        assert!(BooleanFunction::parse_hex("n=1:hex=4").is_err());
        assert!(BooleanFunction::parse_hex("n=3:hex=E").is_err());
        assert!(BooleanFunction::parse_hex("n=2:hex=G").is_err());
        assert!(BooleanFunction::parse_hex("2:E").is_err());
        let t = FamilySpec::Tribes { k: 2, m: 2 }.instance().unwrap();
        assert_eq!(t.to_hex_string(), "n=4:hex=F888");
    }
}
