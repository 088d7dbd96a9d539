//! Coefficient arithmetic for the preset base fields.
//!
//! Three rings live here: mod-2 Milnor K-theory `k^M_*`, the Witt ring `W`,
//! and the Witt K-theory tower `K^W_n = I^{max(n,0)}` with `η` acting as the
//! inclusion of ideal powers. A degree-`d` class of `k^M` sits in motivic
//! bidegree `(-d, -d)`, so `ρ` has bidegree `(-1, -1)`.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of degree-one generators of `k^M` a preset may declare.
pub const KM_MAX_GENS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PresetKind {
    QuadraticallyClosed,
    /// `F_q` with `q ≡ 1 mod 4`.
    FiniteFieldQ1,
    /// `F_q` with `q ≡ 3 mod 4`.
    FiniteFieldQ3,
    CustomNilpotent,
}

/// A monomial in the degree-one generators of `k^M`, ordered by degree first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KmMono {
    deg: u8,
    exps: [u8; KM_MAX_GENS],
}

impl KmMono {
    pub const ONE: KmMono = KmMono { deg: 0, exps: [0; KM_MAX_GENS] };

    pub fn from_exps(exps: [u8; KM_MAX_GENS]) -> Self {
        let deg = exps.iter().map(|&e| e as u32).sum::<u32>() as u8;
        KmMono { deg, exps }
    }

    pub fn generator(i: usize) -> Self {
        let mut exps = [0; KM_MAX_GENS];
        exps[i] = 1;
        Self::from_exps(exps)
    }

    pub fn degree(&self) -> u32 {
        self.deg as u32
    }

    pub fn exps(&self) -> &[u8; KM_MAX_GENS] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    fn times(&self, other: &KmMono) -> KmMono {
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(other.exps.iter()) {
            *e += *o;
        }
        KmMono { deg: self.deg + other.deg, exps }
    }

    fn divides(&self, other: &KmMono) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }
}

/// Fingerprint of a preset, carried by coefficient elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PresetTag(pub u64);

/// A base field preset: the presentation of `k^M_*` plus (for named presets)
/// a frozen Witt ring table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPreset {
    kind: PresetKind,
    name: String,
    gens: Vec<String>,
    rho: Option<usize>,
    vanishing: Vec<KmMono>,
    rho_nilpotence: u32,
}

impl FieldPreset {
    /// Every unit is a square: `k^M_d = 0` for `d ≥ 1`.
    pub fn quadratically_closed() -> Self {
        FieldPreset {
            kind: PresetKind::QuadraticallyClosed,
            name: "qcl".into(),
            gens: Vec::new(),
            rho: None,
            vanishing: Vec::new(),
            rho_nilpotence: 1,
        }
    }

    /// `ρ = 0` and a single class `u` with `u² = 0`.
    pub fn finite_q1() -> Self {
        FieldPreset {
            kind: PresetKind::FiniteFieldQ1,
            name: "fq1".into(),
            gens: vec!["u".into()],
            rho: None,
            vanishing: vec![KmMono::from_exps([2, 0, 0, 0, 0, 0])],
            rho_nilpotence: 1,
        }
    }

    /// `k^M_1 = {ρ}` and `ρ² = 0`.
    pub fn finite_q3() -> Self {
        FieldPreset {
            kind: PresetKind::FiniteFieldQ3,
            name: "fq3".into(),
            gens: vec!["rho".into()],
            rho: Some(0),
            vanishing: vec![KmMono::from_exps([2, 0, 0, 0, 0, 0])],
            rho_nilpotence: 2,
        }
    }

    /// A formal preset: `ρⁿ = 0`, extra degree-one classes, and a list of
    /// vanishing products (each a list of generator names, `rho` allowed).
    pub fn custom(
        name: &str,
        rho_nilpotence: u32,
        classes: &[String],
        vanishing: &[Vec<String>],
    ) -> Result<Self> {
        if rho_nilpotence == 0 {
            return Err(Error::InvalidPreset("rho_nilpotence must be positive".into()));
        }
        if classes.len() + 1 > KM_MAX_GENS {
            return Err(Error::InvalidPreset("too many classes".into()));
        }
        let mut gens: Vec<String> = vec!["rho".into()];
        for c in classes {
            if c == "rho" || gens.contains(c) || c.is_empty() {
                return Err(Error::InvalidPreset(alloc::format!("bad class name {c:?}")));
            }
            if !c.chars().all(|ch| ch.is_ascii_alphabetic()) || is_reserved(c) {
                return Err(Error::InvalidPreset(alloc::format!("reserved or non-alphabetic class name {c:?}")));
            }
            gens.push(c.clone());
        }
        let mut rel = vec![KmMono::from_exps({
            let mut e = [0; KM_MAX_GENS];
            e[0] = rho_nilpotence.min(255) as u8;
            e
        })];
        for prod in vanishing {
            if prod.is_empty() {
                return Err(Error::InvalidPreset("empty vanishing product".into()));
            }
            let mut e = [0u8; KM_MAX_GENS];
            for f in prod {
                let i = gens
                    .iter()
                    .position(|g| g == f)
                    .ok_or_else(|| Error::InvalidPreset(alloc::format!("unknown class {f:?}")))?;
                e[i] += 1;
            }
            rel.push(KmMono::from_exps(e));
        }
        Ok(FieldPreset {
            kind: PresetKind::CustomNilpotent,
            name: alloc::format!("custom:{name}"),
            gens,
            rho: Some(0),
            vanishing: rel,
            rho_nilpotence,
        })
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "qcl" => Some(Self::quadratically_closed()),
            "fq1" => Some(Self::finite_q1()),
            "fq3" => Some(Self::finite_q3()),
            _ => None,
        }
    }

    pub fn kind(&self) -> PresetKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator_names(&self) -> &[String] {
        &self.gens
    }

    pub fn rho_nilpotence(&self) -> u32 {
        self.rho_nilpotence
    }

    pub fn tag(&self) -> PresetTag {
        // FNV-1a over the presentation.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(self.name.as_bytes());
        for g in &self.gens {
            feed(g.as_bytes());
            feed(&[0xff]);
        }
        for v in &self.vanishing {
            feed(&v.exps);
        }
        PresetTag(h)
    }

    /// The monomial `ρ`, or `None` when `ρ = 0` in this preset.
    pub fn rho(&self) -> Option<KmMono> {
        let m = KmMono::generator(self.rho?);
        self.is_nonzero(&m).then_some(m)
    }

    /// Smallest `n` with `ρⁿ = 0`, computed from the relations.
    pub fn rho_order(&self) -> u32 {
        let Some(r) = self.rho() else { return 1 };
        let mut p = KmMono::ONE;
        let mut n = 0;
        loop {
            match self.mono_mul(&p, &r) {
                Some(q) => {
                    p = q;
                    n += 1;
                }
                None => return n + 1,
            }
        }
    }

    pub fn class_mono(&self, name: &str) -> Option<KmMono> {
        let i = self.gens.iter().position(|g| g == name)?;
        let m = KmMono::generator(i);
        Some(m)
    }

    pub fn is_nonzero(&self, m: &KmMono) -> bool {
        !self.vanishing.iter().any(|v| v.divides(m))
    }

    /// Product of monomials; `None` when it vanishes.
    pub fn mono_mul(&self, a: &KmMono, b: &KmMono) -> Option<KmMono> {
        if a.is_one() {
            return Some(*b);
        }
        if b.is_one() {
            return Some(*a);
        }
        let p = a.times(b);
        self.is_nonzero(&p).then_some(p)
    }

    /// `F2`-basis of `k^M_degree` in canonical order.
    pub fn km_basis(&self, degree: u32) -> Vec<KmMono> {
        let mut out = Vec::new();
        let mut exps = [0u8; KM_MAX_GENS];
        self.fill_basis(0, degree, &mut exps, &mut out);
        out.sort();
        out
    }

    fn fill_basis(&self, i: usize, left: u32, exps: &mut [u8; KM_MAX_GENS], out: &mut Vec<KmMono>) {
        if i == self.gens.len() {
            if left == 0 {
                let m = KmMono::from_exps(*exps);
                if self.is_nonzero(&m) {
                    out.push(m);
                }
            }
            return;
        }
        for e in 0..=left {
            exps[i] = e as u8;
            let m = KmMono::from_exps(*exps);
            if !self.is_nonzero(&m) {
                break;
            }
            self.fill_basis(i + 1, left - e, exps, out);
        }
        exps[i] = 0;
    }

    /// Largest degree with `k^M_d ≠ 0` when bounded by `cap`.
    pub fn km_top_degree(&self, cap: u32) -> u32 {
        (0..=cap).rev().find(|&d| !self.km_basis(d).is_empty()).unwrap_or(0)
    }

    pub fn km_zero(&self) -> KmElement {
        KmElement { tag: self.tag(), terms: BTreeSet::new() }
    }

    pub fn km_one(&self) -> KmElement {
        self.km_from_mono(KmMono::ONE)
    }

    pub fn km_from_mono(&self, m: KmMono) -> KmElement {
        let mut terms = BTreeSet::new();
        if self.is_nonzero(&m) {
            terms.insert(m);
        }
        KmElement { tag: self.tag(), terms }
    }

    /// `ρ` as an element (zero in presets where `-1` is a square).
    pub fn km_rho(&self) -> KmElement {
        match self.rho() {
            Some(r) => self.km_from_mono(r),
            None => self.km_zero(),
        }
    }

    pub fn km_mul(&self, a: &KmElement, b: &KmElement) -> Result<KmElement> {
        let tag = self.tag();
        if a.tag != tag || b.tag != tag {
            return Err(Error::PresetMismatch);
        }
        let mut out = self.km_zero();
        for x in &a.terms {
            for y in &b.terms {
                if let Some(p) = self.mono_mul(x, y) {
                    out.toggle(p);
                }
            }
        }
        Ok(out)
    }

    pub fn km_add(&self, a: &KmElement, b: &KmElement) -> Result<KmElement> {
        if a.tag != b.tag {
            return Err(Error::PresetMismatch);
        }
        let mut out = a.clone();
        for m in &b.terms {
            out.toggle(*m);
        }
        Ok(out)
    }

    pub fn format_km(&self, m: &KmMono) -> String {
        if m.is_one() {
            return "1".into();
        }
        let mut parts = Vec::new();
        for (i, &e) in m.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = self.gens.get(i).map(|s| s.as_str()).unwrap_or("?");
            if e == 1 {
                parts.push(name.to_string());
            } else {
                parts.push(alloc::format!("{name}^{e}"));
            }
        }
        parts.join("*")
    }

    /// Checks that the presentation is graded and respects `ρⁿ = 0`.
    pub fn validate(&self) -> Result<()> {
        if self.kind == PresetKind::CustomNilpotent && self.rho_order() > self.rho_nilpotence {
            return Err(Error::InvalidPreset("rho nilpotence not enforced".into()));
        }
        Ok(())
    }

    /// The frozen Witt ring table of a named preset.
    pub fn witt_model(&self) -> Result<WittRingModel> {
        match self.kind {
            PresetKind::QuadraticallyClosed => Ok(WittRingModel::z2()),
            PresetKind::FiniteFieldQ3 => Ok(WittRingModel::z4(self)),
            PresetKind::FiniteFieldQ1 => Ok(WittRingModel::group_ring_c2(self)),
            PresetKind::CustomNilpotent => Err(Error::NoWittModel(self.name.clone())),
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "tau" | "rho" | "t" | "x" | "xb")
        || (s.len() > 1 && (s.starts_with('t') || s.starts_with('x')) && s[1..].chars().all(|c| c.is_ascii_digit()))
}

/// A homogeneous-or-not element of `k^M_*` as an `F2`-set of monomials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KmElement {
    tag: PresetTag,
    terms: BTreeSet<KmMono>,
}

impl KmElement {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &KmMono> {
        self.terms.iter()
    }

    pub fn tag(&self) -> PresetTag {
        self.tag
    }

    pub fn component(&self, degree: u32) -> KmElement {
        KmElement {
            tag: self.tag,
            terms: self.terms.iter().filter(|m| m.degree() == degree).copied().collect(),
        }
    }

    fn toggle(&mut self, m: KmMono) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }
}

/// Index of an element in a [`WittRingModel`] table.
pub type WittIx = u8;

/// A finite commutative ring given by full addition and multiplication tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittRingModel {
    labels: Vec<String>,
    add: Vec<Vec<WittIx>>,
    mul: Vec<Vec<WittIx>>,
    /// Classes `⟨a⟩` of units, listed by square class.
    units: Vec<WittIx>,
    /// Residue of the fundamental ideal `I → I/I² ≅ k^M_1`, as (element, class).
    residue1: Vec<(WittIx, Option<KmMono>)>,
}

impl WittRingModel {
    pub const ZERO: WittIx = 0;
    pub const ONE: WittIx = 1;

    fn z2() -> Self {
        WittRingModel {
            labels: vec!["0".into(), "<1>".into()],
            add: vec![vec![0, 1], vec![1, 0]],
            mul: vec![vec![0, 0], vec![0, 1]],
            units: vec![1],
            residue1: vec![(0, None)],
        }
    }

    fn z4(p: &FieldPreset) -> Self {
        let n = 4u8;
        let add = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let mul = (0..n).map(|a| (0..n).map(|b| (a * b) % n).collect()).collect();
        WittRingModel {
            labels: vec!["0".into(), "<1>".into(), "2<1>".into(), "<-1>".into()],
            add,
            mul,
            units: vec![1, 3],
            // <<-1>> = <1> - <-1> = 2<1> maps to {-1} = ρ.
            residue1: vec![(0, None), (2, p.rho())],
        }
    }

    fn group_ring_c2(p: &FieldPreset) -> Self {
        // bit 0: coefficient of <1>, bit 1: coefficient of <g>, g a nonsquare.
        let add = (0..4u8).map(|a| (0..4u8).map(|b| a ^ b).collect()).collect();
        let mul = (0..4u8)
            .map(|a| {
                (0..4u8)
                    .map(|b| {
                        let (a0, a1, b0, b1) = (a & 1, a >> 1, b & 1, b >> 1);
                        let c0 = (a0 & b0) ^ (a1 & b1);
                        let c1 = (a0 & b1) ^ (a1 & b0);
                        c0 | (c1 << 1)
                    })
                    .collect()
            })
            .collect();
        WittRingModel {
            labels: vec!["0".into(), "<1>".into(), "<g>".into(), "<1>+<g>".into()],
            add,
            mul,
            units: vec![1, 2],
            // <<g>> = <1> - <g> = <1> + <g> maps to {g} = u.
            residue1: vec![(0, None), (3, p.class_mono("u"))],
        }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, x: WittIx) -> &str {
        &self.labels[x as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = WittIx> {
        0..self.order() as WittIx
    }

    pub fn units(&self) -> &[WittIx] {
        &self.units
    }

    pub fn add(&self, a: WittIx, b: WittIx) -> WittIx {
        self.add[a as usize][b as usize]
    }

    pub fn mul(&self, a: WittIx, b: WittIx) -> WittIx {
        self.mul[a as usize][b as usize]
    }

    pub fn neg(&self, a: WittIx) -> WittIx {
        self.elements().find(|&b| self.add(a, b) == Self::ZERO).expect("additive inverse")
    }

    /// `n · a` for an integer `n ≥ 0`.
    pub fn times(&self, n: u32, a: WittIx) -> WittIx {
        (0..n).fold(Self::ZERO, |acc, _| self.add(acc, a))
    }

    /// Smallest `e` with `2^e · x = 0` for all `x`.
    pub fn two_exponent(&self) -> u32 {
        (0..8)
            .find(|&e| self.elements().all(|x| self.times(1 << e, x) == Self::ZERO))
            .expect("2-primary torsion")
    }

    /// Rank mod 2, the ring map `W → F2`.
    pub fn rank_parity(&self, x: WittIx) -> bool {
        // The rank map is additive and sends every unit class to 1; compute it
        // by writing `x` as a sum of unit classes.
        let mut reach: Vec<Option<bool>> = vec![None; self.order()];
        reach[0] = Some(false);
        let mut changed = true;
        while changed {
            changed = false;
            for a in self.elements() {
                if let Some(pa) = reach[a as usize] {
                    for &u in &self.units {
                        let b = self.add(a, u);
                        if reach[b as usize].is_none() {
                            reach[b as usize] = Some(!pa);
                            changed = true;
                        }
                    }
                }
            }
        }
        reach[x as usize].expect("W is generated by unit classes")
    }

    /// Fundamental ideal `I` (even rank).
    pub fn fundamental_ideal(&self) -> Vec<WittIx> {
        self.elements().filter(|&x| !self.rank_parity(x)).collect()
    }

    /// Additive closure of all products of `a` and `b`.
    pub fn product_ideal(&self, a: &[WittIx], b: &[WittIx]) -> Vec<WittIx> {
        let mut set: BTreeSet<WittIx> = BTreeSet::new();
        set.insert(Self::ZERO);
        for &x in a {
            for &y in b {
                set.insert(self.mul(x, y));
            }
        }
        loop {
            let cur: Vec<WittIx> = set.iter().copied().collect();
            let before = set.len();
            for &x in &cur {
                for &y in &cur {
                    set.insert(self.add(x, y));
                }
            }
            if set.len() == before {
                break;
            }
        }
        set.into_iter().collect()
    }

    /// Checks the ring axioms exhaustively on the finite tables.
    pub fn check_axioms(&self) -> bool {
        let els: Vec<WittIx> = self.elements().collect();
        for &a in &els {
            if self.add(a, Self::ZERO) != a || self.mul(a, Self::ONE) != a {
                return false;
            }
            for &b in &els {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
                for &c in &els {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c))
                        || self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c))
                        || self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for WittRingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W of order {} {{{}}}", self.order(), self.labels.join(", "))
    }
}

/// The Witt K-theory tower `K^W_n = I^{max(n,0)}` with `η_n: K^W_{n+1} → K^W_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KwTower {
    witt: WittRingModel,
    /// `powers[n] = I^n` for `n = 0..`, until it stabilizes.
    powers: Vec<Vec<WittIx>>,
}

impl KwTower {
    pub fn new(witt: WittRingModel) -> Self {
        let i1 = witt.fundamental_ideal();
        let mut powers = vec![witt.elements().collect::<Vec<_>>(), i1.clone()];
        loop {
            let next = witt.product_ideal(powers.last().unwrap(), &i1);
            if &next == powers.last().unwrap() {
                break;
            }
            powers.push(next);
        }
        KwTower { witt, powers }
    }

    pub fn witt(&self) -> &WittRingModel {
        &self.witt
    }

    /// The subgroup `K^W_n ⊆ W`.
    pub fn group(&self, n: i32) -> &[WittIx] {
        let k = n.max(0) as usize;
        &self.powers[k.min(self.powers.len() - 1)]
    }

    pub fn contains(&self, n: i32, x: WittIx) -> bool {
        self.group(n).contains(&x)
    }

    /// `η_n: K^W_{n+1} → K^W_n`, the inclusion of ideal powers.
    pub fn eta(&self, n: i32, x: WittIx) -> Result<WittIx> {
        if !self.contains(n + 1, x) {
            return Err(Error::InvalidElement(alloc::format!(
                "{} is not in K^W_{}",
                self.witt.label(x),
                n + 1
            )));
        }
        Ok(x)
    }

    pub fn eta_is_injective(&self, _n: i32) -> bool {
        true
    }

    /// `log2 |K^W_n / η K^W_{n+1}|`.
    pub fn cokernel_dim(&self, n: i32) -> u32 {
        let big = self.group(n).len();
        let small = self.group(n + 1).len();
        (big / small).trailing_zeros()
    }

    /// The residue map `K^W_n → k^M_n` (`I^n/I^{n+1} ≅ k^M_n`).
    pub fn residue(&self, preset: &FieldPreset, n: i32, x: WittIx) -> KmElement {
        match n {
            n if n < 0 => preset.km_zero(),
            0 => {
                if self.witt.rank_parity(x) {
                    preset.km_one()
                } else {
                    preset.km_zero()
                }
            }
            1 => {
                let hit = self.witt.residue1.iter().find(|(w, _)| *w == x);
                match hit {
                    Some((_, Some(m))) => preset.km_from_mono(*m),
                    _ => preset.km_zero(),
                }
            }
            // I^2 = 0 for every preset carrying a model.
            _ => preset.km_zero(),
        }
    }

    /// A lift of a degree-`n` class of `k^M` to `K^W_n` (smallest index).
    pub fn lift(&self, preset: &FieldPreset, n: i32, c: &KmElement) -> Option<WittIx> {
        self.group(n).iter().copied().find(|&x| &self.residue(preset, n, x) == c)
    }

    pub fn multiply(&self, a: WittIx, b: WittIx) -> WittIx {
        self.witt.mul(a, b)
    }

    pub fn add(&self, a: WittIx, b: WittIx) -> WittIx {
        self.witt.add(a, b)
    }
}
