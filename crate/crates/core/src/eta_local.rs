//! The η-inverted algebra `W(k)[η^{±1}][y, x_j] / (y², x_j² − 2x_{j+1})`.
//!
//! Elements are stored with explicit η-powers so bidegrees stay visible:
//! `|η| = (1,1)`, `|y| = (5,0)`, `|x_j| = (2^j,0)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_data::{FieldPreset, WittIx, WittRingModel};
use crate::milnor_dual::{Bidegree, GEN_CAP};
use crate::shadow_modules::KMHWElement;
use crate::witt_models::{FreeMap, FreeMono, KWHWElement, WittModels};

/// `η^eta · y^ε · Π_{j∈J} x_j`, with `J ⊆ {2..GEN_CAP}` stored as bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocalMono {
    pub eta: i32,
    pub y: bool,
    pub x: u8,
}

impl LocalMono {
    pub const ONE: LocalMono = LocalMono { eta: 0, y: false, x: 0 };

    pub fn x_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=GEN_CAP).filter(move |&j| self.x >> j & 1 == 1)
    }

    pub fn bidegree(&self) -> Bidegree {
        let mut p = if self.y { 5 } else { 0 };
        for j in self.x_indices() {
            p += 1 << j;
        }
        Bidegree::new(p + self.eta, self.eta)
    }

    pub fn name(&self) -> String {
        let mut parts = Vec::new();
        match self.eta {
            0 => {}
            1 => parts.push(String::from("eta")),
            e => parts.push(format!("eta^{e}")),
        }
        if self.y {
            parts.push("y".into());
        }
        for j in self.x_indices() {
            parts.push(format!("x{j}"));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// A `W(k)`-linear combination of [`LocalMono`]s in normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalElement {
    pub terms: BTreeMap<LocalMono, WittIx>,
}

impl LocalElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mono(m: LocalMono, w: WittIx) -> Self {
        let mut terms = BTreeMap::new();
        if w != WittRingModel::ZERO {
            terms.insert(m, w);
        }
        LocalElement { terms }
    }

    /// The bidegree, if the element is nonzero and homogeneous.
    pub fn bidegree(&self) -> Option<Bidegree> {
        let mut it = self.terms.keys().map(|m| m.bidegree());
        let b = it.next()?;
        it.all(|c| c == b).then_some(b)
    }
}

/// One relation or rank comparison in a [`CorollaryReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCheck {
    pub p: i32,
    pub predicted: usize,
    pub observed: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub preset: String,
    pub jmax: usize,
    pub ring_map_pairs: usize,
    pub ring_map_failures: Vec<String>,
    pub relations: Vec<LocalCheck>,
    pub ranks: Vec<RankCheck>,
    pub chains: Vec<LocalCheck>,
    pub all_passed: bool,
}

/// Arithmetic in the η-inverted algebra over one preset.
pub struct EtaLocal {
    models: WittModels,
}

impl EtaLocal {
    pub fn new(preset: FieldPreset) -> Result<Self> {
        Ok(EtaLocal { models: WittModels::new(preset)? })
    }

    pub fn from_models(models: WittModels) -> Self {
        EtaLocal { models }
    }

    pub fn models(&self) -> &WittModels {
        &self.models
    }

    fn witt(&self) -> &WittRingModel {
        self.models.tower().witt()
    }

    pub fn one(&self) -> LocalElement {
        LocalElement::mono(LocalMono::ONE, WittRingModel::ONE)
    }

    pub fn eta_pow(&self, m: i32) -> LocalElement {
        LocalElement::mono(LocalMono { eta: m, ..LocalMono::ONE }, WittRingModel::ONE)
    }

    pub fn y(&self) -> LocalElement {
        LocalElement::mono(LocalMono { y: true, ..LocalMono::ONE }, WittRingModel::ONE)
    }

    pub fn x(&self, j: usize) -> Result<LocalElement> {
        if !(2..=GEN_CAP).contains(&j) {
            return Err(Error::GeneratorCap(j));
        }
        Ok(LocalElement::mono(LocalMono { x: 1 << j, ..LocalMono::ONE }, WittRingModel::ONE))
    }

    /// `2 ∈ W(k)`.
    pub fn two(&self) -> WittIx {
        self.witt().add(WittRingModel::ONE, WittRingModel::ONE)
    }

    pub fn scale(&self, w: WittIx, x: &LocalElement) -> LocalElement {
        let mut out = LocalElement::zero();
        for (m, &c) in &x.terms {
            self.add_term(&mut out, *m, self.witt().mul(w, c));
        }
        out
    }

    fn add_term(&self, x: &mut LocalElement, m: LocalMono, c: WittIx) {
        let v = self.witt().add(x.terms.get(&m).copied().unwrap_or(WittRingModel::ZERO), c);
        if v == WittRingModel::ZERO {
            x.terms.remove(&m);
        } else {
            x.terms.insert(m, v);
        }
    }

    pub fn add(&self, x: &LocalElement, y: &LocalElement) -> LocalElement {
        let mut out = x.clone();
        for (m, &c) in &y.terms {
            self.add_term(&mut out, *m, c);
        }
        out
    }

    /// The product in normal form. Fails only if a carry `x_j² → 2x_{j+1}`
    /// with nonzero coefficient passes the generator cap.
    pub fn local_mul(&self, x: &LocalElement, y: &LocalElement) -> Result<LocalElement> {
        let w = self.witt();
        let two = self.two();
        let mut out = LocalElement::zero();
        for (m1, &a1) in &x.terms {
            for (m2, &a2) in &y.terms {
                if m1.y && m2.y {
                    continue;
                }
                let mut coeff = w.mul(a1, a2);
                let mut counts = [0u8; GEN_CAP + 2];
                for j in m1.x_indices().chain(m2.x_indices()) {
                    counts[j] += 1;
                }
                let mut j = 2;
                while j <= GEN_CAP && coeff != WittRingModel::ZERO {
                    if counts[j] >= 2 {
                        if j + 1 > GEN_CAP {
                            return Err(Error::GeneratorCap(j + 1));
                        }
                        counts[j] -= 2;
                        counts[j + 1] += 1;
                        coeff = w.mul(coeff, two);
                        j = 2;
                        continue;
                    }
                    j += 1;
                }
                if coeff == WittRingModel::ZERO {
                    continue;
                }
                let mut bits = 0u8;
                for (j, &c) in counts.iter().enumerate() {
                    if c == 1 {
                        bits |= 1 << j;
                    }
                }
                self.add_term(&mut out, LocalMono { eta: m1.eta + m2.eta, y: m1.y || m2.y, x: bits }, coeff);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, x: &LocalElement, k: u32) -> Result<LocalElement> {
        let mut out = self.one();
        for _ in 0..k {
            out = self.local_mul(&out, x)?;
        }
        Ok(out)
    }

    /// `t_j ↦ η^{2^j−1} x_j`, `s ↦ η y`, a coefficient in `K^W_n ⊆ W` picks
    /// up `η^{−n}`, and the torsion part dies.
    pub fn localize_free(&self, deg: Bidegree, free: &FreeMap) -> Result<LocalElement> {
        let mut out = LocalElement::zero();
        for (m, &w) in free {
            let n = WittModels::coefficient_degree(deg, m)
                .ok_or_else(|| Error::InvalidElement(format!("inhomogeneous at {deg}")))?;
            let mut eta = -n + i32::from(m.s);
            for j in m.t_indices() {
                eta += (1 << j) - 1;
            }
            self.add_term(&mut out, LocalMono { eta, y: m.s, x: m.t }, w);
        }
        Ok(out)
    }

    pub fn localize(&self, x: &KWHWElement) -> Result<LocalElement> {
        self.localize_free(x.deg, &x.free)
    }

    pub fn format(&self, x: &LocalElement) -> String {
        if x.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = x
            .terms
            .iter()
            .map(|(m, &w)| {
                if w == WittRingModel::ONE {
                    m.name()
                } else if m == &LocalMono::ONE {
                    self.witt().label(w).into()
                } else {
                    format!("{}*{}", self.witt().label(w), m.name())
                }
            })
            .collect();
        parts.join(" + ")
    }

    /// A random homogeneous element of `K^W_{**}H_W`: one free term
    /// `w·s^ε·Π t_j` (`w ∈ K^W_n`, `−1 ≤ n ≤ 1`) plus a random torsion class.
    pub fn random_kw<R: RngCore>(&self, rng: &mut R) -> Result<KWHWElement> {
        let s = rng.next_u32().is_multiple_of(3);
        let t = match rng.next_u32() % 5 {
            0 => 0,
            1 | 2 => 1 << 2,
            3 => 1 << 3,
            _ => 1 << 2 | 1 << 3,
        };
        let m = FreeMono { s, t };
        let n = (rng.next_u32() % 3) as i32 - 1;
        let group = self.models.tower().group(n);
        let w = group[rng.next_u32() as usize % group.len()];
        let mut x = self.models.free_element(m, n, w)?;
        if rng.next_u32().is_multiple_of(2) {
            let src = x.deg + Bidegree::d_shift();
            let space = self.models.shadow().kmhw_space(src);
            let terms = space.monomials.iter().copied().filter(|_| rng.next_u32().is_multiple_of(2)).collect();
            let pre = KMHWElement { deg: src, terms };
            let t = self.models.shadow().d_left(&pre)?;
            x = self.models.kw_add(&x, &self.models.torsion(t)?)?;
        }
        Ok(x)
    }

    /// Ring-map property of `localize` on `pairs` random pairs, the printed
    /// relations for `j ≤ jmax`, ranks in degrees `p ≤ 2^{jmax+1}` against
    /// the Hilbert series of the presentation, and `x_j^k` chains for `k ≤ 8`.
    pub fn verify_corollary<R: RngCore>(&self, jmax: usize, pairs: usize, rng: &mut R) -> Result<CorollaryReport> {
        if !(2..GEN_CAP).contains(&jmax) {
            return Err(Error::GeneratorCap(jmax + 1));
        }
        let mut failures = Vec::new();
        for i in 0..pairs {
            let a = self.random_kw(rng)?;
            let b = self.random_kw(rng)?;
            let ab = self.models.kw_mul(&a, &b)?;
            let lhs = self.localize(&ab)?;
            let rhs = self.local_mul(&self.localize(&a)?, &self.localize(&b)?)?;
            if lhs != rhs {
                failures.push(format!(
                    "pair {i}: ({}) * ({}) gives {} but {}",
                    self.models.format_kw(&a),
                    self.models.format_kw(&b),
                    self.format(&lhs),
                    self.format(&rhs)
                ));
            }
        }
        let relations = self.relation_checks(jmax)?;
        let ranks = self.rank_checks(jmax)?;
        let chains = self.chain_checks(jmax)?;
        let all_passed = failures.is_empty()
            && relations.iter().all(|c| c.passed)
            && ranks.iter().all(|c| c.passed)
            && chains.iter().all(|c| c.passed);
        Ok(CorollaryReport {
            preset: self.models.alg().preset().name().into(),
            jmax,
            ring_map_pairs: pairs,
            ring_map_failures: failures,
            relations,
            ranks,
            chains,
            all_passed,
        })
    }

    fn check(&self, name: String, expected: &LocalElement, actual: &LocalElement) -> LocalCheck {
        LocalCheck {
            name,
            expected: self.format(expected),
            actual: self.format(actual),
            passed: expected == actual,
        }
    }

    /// The generators pulled back from `K^W_{**}H_W`: `x_j = η^{1−2^j}·loc(t_j)`.
    fn x_from_model(&self, j: usize) -> Result<LocalElement> {
        let t = self.models.free_element(FreeMono::t(j)?, 0, WittRingModel::ONE)?;
        self.local_mul(&self.eta_pow(1 - (1 << j)), &self.localize(&t)?)
    }

    fn y_from_model(&self) -> Result<LocalElement> {
        let s = self.models.free_element(FreeMono::s(), 0, WittRingModel::ONE)?;
        self.local_mul(&self.eta_pow(-1), &self.localize(&s)?)
    }

    fn relation_checks(&self, jmax: usize) -> Result<Vec<LocalCheck>> {
        let mut out = Vec::new();
        let y = self.y_from_model()?;
        let s = self.models.free_element(FreeMono::s(), 0, WittRingModel::ONE)?;
        let ss = self.models.free_mul(&s.free, &s.free)?;
        let y2 = self.local_mul(&self.eta_pow(-2), &self.localize_free(s.deg + s.deg, &ss)?)?;
        out.push(self.check("y^2 = 0".into(), &LocalElement::zero(), &y2));
        out.push(self.check("y = eta^-1 loc(s)".into(), &self.y(), &y));
        for j in 2..=jmax {
            let xj = self.x_from_model(j)?;
            out.push(self.check(format!("x{j} = eta^{} loc(t{j})", 1 - (1i32 << j)), &self.x(j)?, &xj));
            let t = self.models.free_element(FreeMono::t(j)?, 0, WittRingModel::ONE)?;
            let tt = self.models.free_mul(&t.free, &t.free)?;
            let sq = self.local_mul(&self.eta_pow(2 - (2 << j)), &self.localize_free(t.deg + t.deg, &tt)?)?;
            let expected = self.scale(self.two(), &self.x(j + 1)?);
            out.push(self.check(format!("x{j}^2 = 2 x{}", j + 1), &expected, &sq));
        }
        Ok(out)
    }

    /// Observed rank in degree `(p, 0)`: the rank over `W/𝔪 = F2` of the
    /// localized products of `s` and `t_j` (each at most squared).
    fn observed_rank(&self, p: i32, jmax: usize) -> Result<usize> {
        // Generator exponents e_s ∈ {0,1,2}, e_j ∈ {0,1,2}.
        let gens: Vec<(FreeMono, i32)> = core::iter::once((FreeMono::s(), 5))
            .chain((2..=jmax + 1).map(|j| (FreeMono::t(j).expect("below cap"), 1 << j)))
            .collect();
        let mut residues: Vec<BTreeMap<LocalMono, bool>> = Vec::new();
        let total = 3usize.pow(gens.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut exps = Vec::with_capacity(gens.len());
            let mut deg = 0;
            for (_, d) in &gens {
                exps.push(c % 3);
                deg += d * (c % 3) as i32;
                c /= 3;
            }
            if deg != p {
                continue;
            }
            let mut free: FreeMap = BTreeMap::new();
            free.insert(FreeMono::ONE, WittRingModel::ONE);
            let mut b = Bidegree::ZERO;
            for ((g, _), &e) in gens.iter().zip(&exps) {
                let mut single: FreeMap = BTreeMap::new();
                single.insert(*g, WittRingModel::ONE);
                for _ in 0..e {
                    free = self.models.free_mul(&free, &single)?;
                    b = b + g.bidegree();
                }
            }
            let loc = self.localize_free(b, &free)?;
            let row = loc
                .terms
                .iter()
                .map(|(m, &w)| (LocalMono { eta: 0, ..*m }, self.witt().rank_parity(w)))
                .filter(|(_, u)| *u)
                .collect();
            residues.push(row);
        }
        let mut index: BTreeMap<LocalMono, usize> = BTreeMap::new();
        for r in &residues {
            for m in r.keys() {
                let n = index.len();
                index.entry(*m).or_insert(n);
            }
        }
        let mut red = crate::linalg::Reducer::new(index.len());
        for r in &residues {
            let v = crate::linalg::BitVec::from_ones(index.len(), r.keys().map(|m| index[m]));
            red.insert(&v);
        }
        Ok(red.rank())
    }

    fn rank_checks(&self, jmax: usize) -> Result<Vec<RankCheck>> {
        let top = 1i32 << (jmax + 1);
        // Hilbert series (1 + t^5) Π_{j=2}^{jmax+1} (1 + t^{2^j}).
        let mut series = vec![0usize; top as usize + 1];
        series[0] = 1;
        let mut factors = vec![5usize];
        factors.extend((2..=jmax + 1).map(|j| 1usize << j));
        for d in factors {
            for k in (d..series.len()).rev() {
                series[k] += series[k - d];
            }
        }
        let mut out = Vec::new();
        for p in 0..=top {
            let observed = self.observed_rank(p, jmax)?;
            let predicted = series[p as usize];
            out.push(RankCheck { p, predicted, observed, passed: predicted == observed });
        }
        Ok(out)
    }

    /// `x_j^k` by left-to-right products against products of powers.
    fn chain_checks(&self, jmax: usize) -> Result<Vec<LocalCheck>> {
        let mut out = Vec::new();
        for j in 2..=jmax {
            let x = self.x(j)?;
            let mut left = self.one();
            let mut agree = true;
            for k in 1..=8u32 {
                left = self.local_mul(&left, &x)?;
                for a in 1..k {
                    let split = self.local_mul(&self.pow(&x, a)?, &self.pow(&x, k - a)?)?;
                    if split != left {
                        agree = false;
                        out.push(self.check(format!("x{j}^{a} * x{j}^{} = x{j}^{k}", k - a), &left, &split));
                    }
                }
                // x_j^2 = 2 x_{j+1} and x_j^4 = 4 x_{j+2}.
                let step = match k {
                    2 => 1,
                    4 => 2,
                    _ => continue,
                };
                let coeff = self.witt().times(1 << step, WittRingModel::ONE);
                let expected = if j + step <= GEN_CAP {
                    self.scale(coeff, &self.x(j + step)?)
                } else {
                    LocalElement::zero()
                };
                out.push(self.check(format!("x{j}^{k} = {} x{}", 1 << step, j + step), &expected, &left));
            }
            out.push(LocalCheck {
                name: format!("x{j}^k bracketings agree for k <= 8"),
                expected: String::new(),
                actual: String::new(),
                passed: agree,
            });
        }
        let e = self.witt().two_exponent();
        let probe = self.add(&self.y(), &self.x(2)?);
        let killed = self.scale(self.witt().times(1 << e, WittRingModel::ONE), &probe);
        out.push(self.check(format!("2^{e} (y + x2) = 0"), &LocalElement::zero(), &killed));
        Ok(out)
    }
}
