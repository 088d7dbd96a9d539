//! Models of `K^W_{**}H_W` and `H_W{}_{**}H_W`.
//!
//! `K^W_{**}H_W` is modelled as a free part (square-free monomials in `s` and
//! the `t_j` with `K^W` coefficients) plus an `η`-torsion part, stored by its
//! class in `KMHW` and required to lie in the image of `d_left`. The residue
//! map `r̄` sends `t_j ↦ τ_j`, `s ↦ τ₀³τ₁` and is the identity on torsion.
//!
//! `H_W{}_{**}H_W` is modelled as compatible pairs `(a, b)` with `a ∈ HW`,
//! `b ∈ K^W_{**}H_W` and `π(a) = r̄(b)` in `KMHW`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_data::{FieldPreset, KwTower, WittIx, WittRingModel};
use crate::homology_engine::{
    b_bidegree, c1_bidegree, c_bidegree, c_elt, c_single, compare_kernel_span, matrix_of, xi_bar_set, MapId,
};
use crate::linalg::Reducer;
use crate::milnor_dual::{AElement, AMonomial, Bidegree, DualSteenrod, Scalar, ScalarMono, Side, GEN_CAP};
use crate::shadow_modules::{IndexSet, KMHWElement, ShadowModules};

/// `s^ε Π_{j∈J} t_j`, with `J ⊆ {2..GEN_CAP}` stored as bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct FreeMono {
    pub s: bool,
    pub t: u8,
}

impl FreeMono {
    pub const ONE: FreeMono = FreeMono { s: false, t: 0 };

    pub fn s() -> Self {
        FreeMono { s: true, t: 0 }
    }

    pub fn t(j: usize) -> Result<Self> {
        if !(2..=GEN_CAP).contains(&j) {
            return Err(Error::GeneratorCap(j));
        }
        Ok(FreeMono { s: false, t: 1 << j })
    }

    pub fn t_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=GEN_CAP).filter(move |&j| self.t >> j & 1 == 1)
    }

    pub fn bidegree(&self) -> Bidegree {
        let mut b = if self.s { b_bidegree() } else { Bidegree::ZERO };
        for j in self.t_indices() {
            b = b + Bidegree::tau_i(j);
        }
        b
    }

    pub fn name(&self) -> String {
        let mut parts = Vec::new();
        if self.s {
            parts.push(String::from("s"));
        }
        for j in self.t_indices() {
            parts.push(format!("t{j}"));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

pub type FreeMap = BTreeMap<FreeMono, WittIx>;

/// A homogeneous element of `K^W_{**}H_W`.
///
/// The coefficient of a free monomial `m` lies in `K^W_n` with
/// `deg − |m| = (−n, −n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWHWElement {
    pub deg: Bidegree,
    pub free: BTreeMap<FreeMono, WittIx>,
    pub torsion: KMHWElement,
}

impl KWHWElement {
    pub fn zero(deg: Bidegree) -> Self {
        KWHWElement { deg, free: BTreeMap::new(), torsion: KMHWElement::zero(deg) }
    }

    pub fn is_zero(&self) -> bool {
        self.free.is_empty() && self.torsion.is_zero()
    }

    pub fn is_torsion(&self) -> bool {
        self.free.is_empty()
    }
}

/// An element of `H_W{}_{**}H_W` as a compatible pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HWHWPair {
    pub deg: Bidegree,
    pub a: AElement,
    pub b: KWHWElement,
}

/// Symbols appearing in the relations and in generator monomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    /// The scalar `τ`; which action it denotes is chosen at evaluation.
    Tau,
    Rho,
    Tau0,
    S,
    Tj(u8),
    C(IndexSet),
    /// `c(e_k) = ξ̄_{k−1}²`, with `c(e_1) = 1`.
    Ce(u8),
    C1(IndexSet),
    T(IndexSet),
    T1(IndexSet),
    /// `ξ_j · η_R(τ)`.
    XiTau(u8),
    XiBar(u8),
}

impl Factor {
    pub fn bidegree(&self) -> Bidegree {
        match *self {
            Factor::Tau => Bidegree::tau(),
            Factor::Rho => Bidegree::km(1),
            Factor::Tau0 => Bidegree::tau_i(0),
            Factor::S => b_bidegree(),
            Factor::Tj(j) => Bidegree::tau_i(j as usize),
            Factor::C(i) if i.is_empty() => Bidegree::ZERO,
            Factor::C(i) => c_bidegree(&i),
            Factor::Ce(1) => Bidegree::ZERO,
            Factor::Ce(k) => Bidegree::xi_i(k as usize - 1).scale(2),
            Factor::C1(i) => c1_bidegree(&i),
            Factor::T(i) => Bidegree::tau() + i.xi_bidegree(),
            Factor::T1(i) => Bidegree::tau() + Bidegree::tau_i(1) + i.xi_bidegree(),
            Factor::XiTau(j) => Bidegree::xi_i(j as usize) + Bidegree::tau(),
            Factor::XiBar(j) => Bidegree::xi_i(j as usize),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Factor::Tau => "tau".into(),
            Factor::Rho => "rho".into(),
            Factor::Tau0 => "t0".into(),
            Factor::S => "s".into(),
            Factor::Tj(j) => format!("t{j}"),
            Factor::C(i) => format!("c{i}"),
            Factor::Ce(k) => format!("c{{{k}}}"),
            Factor::C1(i) => format!("c1{i}"),
            Factor::T(i) if i.is_empty() => "tau".into(),
            Factor::T(i) => format!("t{i}"),
            Factor::T1(i) => format!("t1{i}"),
            Factor::XiTau(j) => format!("x{j}*tau"),
            Factor::XiBar(j) => format!("xb{j}"),
        }
    }
}

/// A sum of products of symbols.
pub type Expr = Vec<Vec<Factor>>;

pub fn format_expr(e: &Expr) -> String {
    if e.is_empty() {
        return "0".into();
    }
    e.iter()
        .map(|t| if t.is_empty() { "1".into() } else { t.iter().map(Factor::name).collect::<Vec<_>>().join("*") })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn term_bidegree(t: &[Factor]) -> Bidegree {
    t.iter().fold(Bidegree::ZERO, |b, f| b + f.bidegree())
}

/// How `c(∅)` is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyC {
    /// `c(∅) = 1`.
    One,
    /// `c(∅)` is the empty sum.
    Zero,
}

/// Where a relation is asserted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// In `HW ⊂ A`.
    Hw,
    /// In `H_W{}_{**}H_W`, on compatible pairs.
    Pair,
    /// In `K^W_{**}H_W`.
    Kw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    CRelations,
    TRelations,
    KwPresentation,
    MainTheorem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub id: String,
    pub family: Family,
    pub target: Target,
    pub params: String,
    pub lhs: Expr,
    pub rhs: Expr,
    pub convention: EmptyC,
    pub corrected_rhs: Option<Expr>,
    pub correction: Option<String>,
    /// False for relations that are needed but not stated.
    pub stated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationStatus {
    Holds,
    Fails,
    FailsAsPrintedHoldsWithCorrection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub id: String,
    pub family: Family,
    pub target: Target,
    pub params: String,
    pub statement: String,
    pub homogeneous: bool,
    /// `|lhs| − |rhs term|` for the first term of another degree.
    pub defect: Option<Bidegree>,
    pub status: RelationStatus,
    /// Readings of the scalar `τ` under which the accepted form holds.
    pub sides: Vec<Side>,
    pub correction: Option<String>,
    pub detail: Option<String>,
    pub stated: bool,
}

/// Rewrite rules for normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSet {
    /// The printed relations.
    Printed,
    /// Adds `s·c(I) = τ₀³c₁(I) + τ t(I) c(e₂)`, the `c(I)t₁(J)` analogue of the
    /// `c(I)t(J)` relation, and the overlap of `τ₀⁴` with `c(I)τ₀`, oriented
    /// towards `τ₀³ c(e_i) c₁(K)` with `i > max K`.
    Completed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub bidegree: Bidegree,
    /// Which rewrite rules defined the irreducible monomials.
    pub rules: RuleSet,
    pub monomials: Vec<String>,
    pub rank: usize,
    pub independent: bool,
    /// `dim` of the image of `H_W{}_{**}H_W` in `HW_b`.
    pub target_dim: usize,
    pub spans: bool,
    /// Monomials of a dependency, when one exists.
    pub dependency: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaTorsionReport {
    pub bidegree: Bidegree,
    pub dim_torsion: usize,
    pub boundary_span_rank: usize,
    pub dim_ker: usize,
    pub residue_image_rank: usize,
    pub higher_torsion_free: bool,
    pub matches: bool,
}

/// Witt-side models over a preset with a Witt ring table.
pub struct WittModels {
    shadow: ShadowModules,
    tower: KwTower,
    rho_lift: WittIx,
    images: RefCell<BTreeMap<Bidegree, Rc<Reducer>>>,
}

impl WittModels {
    /// Refuses presets without a Witt model and presets with `k^M_2 ≠ 0`,
    /// where lifts of `ρτ_j` would not be unique.
    pub fn new(preset: FieldPreset) -> Result<Self> {
        let witt = preset.witt_model()?;
        if !preset.km_basis(2).is_empty() {
            return Err(Error::LiftsNotUnique(format!("k^M_2 is nonzero over {}", preset.name())));
        }
        let tower = KwTower::new(witt);
        let rho_lift = tower.lift(&preset, 1, &preset.km_rho()).ok_or(Error::NotInImage)?;
        Ok(WittModels {
            shadow: ShadowModules::new(DualSteenrod::new(preset)),
            tower,
            rho_lift,
            images: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn shadow(&self) -> &ShadowModules {
        &self.shadow
    }

    pub fn alg(&self) -> &DualSteenrod {
        self.shadow.alg()
    }

    pub fn tower(&self) -> &KwTower {
        &self.tower
    }

    fn witt(&self) -> &WittRingModel {
        self.tower.witt()
    }

    /// The lift `ρ̃ ∈ K^W_1` of `ρ`.
    pub fn rho_lift(&self) -> WittIx {
        self.rho_lift
    }

    // ---- K^W_{**}H_W ------------------------------------------------------------

    /// `n` with `coefficient ∈ K^W_n` for monomial `m` in an element of bidegree `deg`.
    pub fn coefficient_degree(deg: Bidegree, m: &FreeMono) -> Option<i32> {
        let d = deg - m.bidegree();
        (d.p == d.q).then_some(-d.p)
    }

    fn image_reducer(&self, b: Bidegree) -> Result<Rc<Reducer>> {
        if let Some(r) = self.images.borrow().get(&b) {
            return Ok(r.clone());
        }
        let an = matrix_of(&self.shadow, MapId::DLeft, b + Bidegree::d_shift())?.analyze();
        let mut r = Reducer::new(self.shadow.kmhw_space(b).dim());
        for v in &an.image {
            r.insert(v);
        }
        let r = Rc::new(r);
        self.images.borrow_mut().insert(b, r.clone());
        Ok(r)
    }

    pub fn in_image(&self, x: &KMHWElement) -> Result<bool> {
        Ok(self.image_reducer(x.deg)?.contains(&self.shadow.kmhw_coords(x)))
    }

    /// A preimage of a torsion class under `d_left`.
    pub fn torsion_certificate(&self, x: &KMHWElement) -> Result<KMHWElement> {
        let src = x.deg + Bidegree::d_shift();
        let an = matrix_of(&self.shadow, MapId::DLeft, src)?;
        let space = self.shadow.kmhw_space(src);
        let mut r = Reducer::new(an.rows());
        for j in 0..an.cols() {
            r.insert(an.column(j));
        }
        let combo = r.solve(&self.shadow.kmhw_coords(x)).ok_or(Error::NotInImage)?;
        let terms = combo.into_iter().map(|k| space.monomials[k]).collect();
        Ok(KMHWElement { deg: src, terms })
    }

    pub fn unit(&self) -> KWHWElement {
        let mut free = BTreeMap::new();
        free.insert(FreeMono::ONE, WittRingModel::ONE);
        KWHWElement { deg: Bidegree::ZERO, free, torsion: KMHWElement::zero(Bidegree::ZERO) }
    }

    /// `w · m` with `w ∈ K^W_n`.
    pub fn free_element(&self, m: FreeMono, n: i32, w: WittIx) -> Result<KWHWElement> {
        if !self.tower.contains(n, w) {
            return Err(Error::InvalidElement(format!("{} is not in K^W_{n}", self.witt().label(w))));
        }
        let deg = m.bidegree() + Bidegree::km(0) - Bidegree::new(n, n);
        let mut x = KWHWElement::zero(deg);
        if w != WittRingModel::ZERO {
            x.free.insert(m, w);
        }
        Ok(x)
    }

    pub fn torsion(&self, t: KMHWElement) -> Result<KWHWElement> {
        if !self.in_image(&t)? {
            return Err(Error::NotInImage);
        }
        Ok(KWHWElement { deg: t.deg, free: BTreeMap::new(), torsion: t })
    }

    fn free_lift(&self, m: &FreeMono) -> AElement {
        let a = self.alg();
        let mut x = if m.s {
            a.mul(&a.pow(&a.tau_gen(0), 3), &a.tau_gen(1))
        } else {
            AElement::one()
        };
        for j in m.t_indices() {
            x = a.mul(&x, &a.tau_gen(j));
        }
        x
    }

    /// `r̄: K^W_{**}H_W → KMHW`.
    pub fn residue(&self, x: &KWHWElement) -> Result<KMHWElement> {
        let mut out = x.torsion.clone();
        let preset = self.alg().preset();
        for (m, &w) in &x.free {
            let n = Self::coefficient_degree(x.deg, m).ok_or_else(|| Error::InvalidElement("inhomogeneous".into()))?;
            let c = self.tower.residue(preset, n, w);
            let lift = self.free_lift(m);
            for cm in c.terms() {
                let y = self.alg().mul(&self.alg().km_elt(*cm), &lift);
                out = out.add(&self.shadow.to_kmhw_at(x.deg, &y)?);
            }
        }
        Ok(out)
    }

    pub fn kw_add(&self, x: &KWHWElement, y: &KWHWElement) -> Result<KWHWElement> {
        if x.deg != y.deg {
            return Err(Error::InvalidElement(format!("adding bidegrees {} and {}", x.deg, y.deg)));
        }
        let mut free = x.free.clone();
        for (m, &w) in &y.free {
            add_coeff(self.witt(), &mut free, *m, w);
        }
        Ok(KWHWElement { deg: x.deg, free, torsion: x.torsion.add(&y.torsion) })
    }

    /// Products of free parts, rewriting `t_j² = ρ̃ t_{j+1}` and `s² = 0`.
    pub fn free_mul(&self, x: &FreeMap, y: &FreeMap) -> Result<FreeMap> {
        let w = self.witt();
        let mut out = BTreeMap::new();
        for (m1, &a1) in x {
            for (m2, &a2) in y {
                if m1.s && m2.s {
                    continue;
                }
                let mut coeff = w.mul(a1, a2);
                let mut counts = [0u8; GEN_CAP + 2];
                for j in m1.t_indices().chain(m2.t_indices()) {
                    counts[j] += 1;
                }
                let mut j = 2;
                while j <= GEN_CAP {
                    if counts[j] >= 2 {
                        if j + 1 > GEN_CAP {
                            return Err(Error::GeneratorCap(j + 1));
                        }
                        counts[j] -= 2;
                        counts[j + 1] += 1;
                        coeff = w.mul(coeff, self.rho_lift);
                        j = 2;
                        continue;
                    }
                    j += 1;
                }
                if coeff == WittRingModel::ZERO {
                    continue;
                }
                let mut t = 0u8;
                for (j, &c) in counts.iter().enumerate() {
                    if c == 1 {
                        t |= 1 << j;
                    }
                }
                add_coeff(w, &mut out, FreeMono { s: m1.s || m2.s, t }, coeff);
            }
        }
        Ok(out)
    }

    /// The product, with the torsion part fixed by multiplicativity of `r̄`.
    pub fn kw_mul(&self, x: &KWHWElement, y: &KWHWElement) -> Result<KWHWElement> {
        let deg = x.deg + y.deg;
        let free = self.free_mul(&x.free, &y.free)?;
        let f = KWHWElement { deg, free, torsion: KMHWElement::zero(deg) };
        let total = self.shadow.kmhw_mul(&self.residue(x)?, &self.residue(y)?)?;
        let t = total.add(&self.residue(&f)?);
        if !self.in_image(&t)? {
            return Err(Error::InvalidElement(format!(
                "torsion part {} of a product is not a boundary",
                self.shadow.format_kmhw(&t)
            )));
        }
        Ok(KWHWElement { torsion: t, ..f })
    }

    /// `η · x`: coefficients move down one step of the tower and torsion dies.
    pub fn kw_eta(&self, x: &KWHWElement) -> KWHWElement {
        let deg = x.deg + Bidegree::new(1, 1);
        KWHWElement { deg, free: x.free.clone(), torsion: KMHWElement::zero(deg) }
    }

    pub fn format_kw(&self, x: &KWHWElement) -> String {
        let mut parts: Vec<String> = x
            .free
            .iter()
            .map(|(m, &w)| {
                let l = self.witt().label(w);
                if m.is_one() {
                    String::from(l)
                } else if w == WittRingModel::ONE {
                    m.name()
                } else {
                    format!("{l}*{}", m.name())
                }
            })
            .collect();
        if !x.torsion.is_zero() {
            parts.push(format!("[{}]", self.shadow.format_kmhw(&x.torsion)));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    // ---- pairs ------------------------------------------------------------------

    /// Checks `a ∈ HW` and `π(a) = r̄(b)`.
    pub fn make_pair(&self, a: AElement, b: KWHWElement) -> Result<HWHWPair> {
        let deg = b.deg;
        if let Some(d) = a.homogeneous_degree() {
            if d != deg {
                return Err(Error::InvalidElement(format!("components of bidegrees {d} and {deg}")));
            }
        }
        let ra = self.shadow.to_kmhw_at(deg, &a)?;
        let rb = self.residue(&b)?;
        if ra != rb {
            return Err(Error::IncompatiblePair {
                residue_a: self.shadow.format_kmhw(&ra),
                residue_b: self.shadow.format_kmhw(&rb),
            });
        }
        Ok(HWHWPair { deg, a, b })
    }

    pub fn pair_add(&self, x: &HWHWPair, y: &HWHWPair) -> Result<HWHWPair> {
        Ok(HWHWPair { deg: x.deg, a: x.a.add(&y.a), b: self.kw_add(&x.b, &y.b)? })
    }

    pub fn pair_mul(&self, x: &HWHWPair, y: &HWHWPair) -> Result<HWHWPair> {
        Ok(HWHWPair { deg: x.deg + y.deg, a: self.alg().mul(&x.a, &y.a), b: self.kw_mul(&x.b, &y.b)? })
    }

    pub fn pair_unit(&self) -> HWHWPair {
        HWHWPair { deg: Bidegree::ZERO, a: AElement::one(), b: self.unit() }
    }

    /// `(τ, 0)` acting on the given side. On the right, `τ` acts on `A` through
    /// `η_R(τ) = τ + ρτ₀` and on `K^W_{**}H_W` through the torsion class of `ρτ₀`.
    pub fn pair_tau(&self, x: &HWHWPair, side: Side) -> Result<HWHWPair> {
        let deg = x.deg + Bidegree::tau();
        match side {
            Side::Left => Ok(HWHWPair {
                deg,
                a: self.alg().scale_left(&ScalarMono::tau_pow(1), &x.a),
                b: KWHWElement::zero(deg),
            }),
            Side::Right => Ok(HWHWPair {
                deg,
                a: self.alg().right_scale(&x.a, &Scalar::mono(ScalarMono::tau_pow(1))),
                b: self.kw_tau_right(&x.b)?,
            }),
        }
    }

    fn kw_tau_right(&self, b: &KWHWElement) -> Result<KWHWElement> {
        let t = self.shadow.to_kmhw_at(Bidegree::tau(), &self.alg().eta_r_tau_pow(1))?;
        self.kw_mul(b, &self.torsion(t)?)
    }

    pub fn format_pair(&self, x: &HWHWPair) -> String {
        format!("({} ; {})", self.alg().format(&x.a), self.format_kw(&x.b))
    }

    // ---- generators ---------------------------------------------------------------

    fn eval_a(&self, f: Factor, conv: EmptyC) -> Result<AElement> {
        let a = self.alg();
        let tau = |x: &AElement| a.scale_left(&ScalarMono::tau_pow(1), x);
        Ok(match f {
            Factor::Tau => tau(&AElement::one()),
            Factor::Rho => a.rho_elt(),
            Factor::Tau0 => a.tau_gen(0),
            Factor::S => self.free_lift(&FreeMono::s()),
            Factor::Tj(j) => a.tau_gen(j as usize),
            Factor::C(i) => self.c_conv(&i, conv)?,
            Factor::Ce(k) => c_single(&self.shadow, k as usize),
            Factor::C1(i) => a
                .mul(&a.tau_gen(0), &xi_bar_set(&self.shadow, &i)?)
                .add(&a.mul(&a.tau_gen(1), &self.c_conv(&i, conv)?)),
            Factor::T(i) => tau(&xi_bar_set(&self.shadow, &i)?),
            Factor::T1(i) => tau(&a.mul(&a.tau_gen(1), &xi_bar_set(&self.shadow, &i)?)),
            Factor::XiTau(j) => a.right_scale(&a.xi_gen(j as usize), &Scalar::mono(ScalarMono::tau_pow(1))),
            Factor::XiBar(j) => (*a.xi_bar_pow(j as usize, 1)).clone(),
        })
    }

    fn c_conv(&self, i: &IndexSet, conv: EmptyC) -> Result<AElement> {
        if i.is_empty() && conv == EmptyC::One {
            return Ok(AElement::one());
        }
        c_elt(&self.shadow, i)
    }

    pub(crate) fn eval_b(&self, f: Factor, conv: EmptyC) -> Result<KWHWElement> {
        let deg = f.bidegree();
        match f {
            Factor::C(i) if i.is_empty() => Ok(match conv {
                EmptyC::One => self.unit(),
                EmptyC::Zero => KWHWElement::zero(deg),
            }),
            Factor::Ce(1) => Ok(self.unit()),
            Factor::S => self.free_element(FreeMono::s(), 0, WittRingModel::ONE),
            Factor::Tj(j) => self.free_element(FreeMono::t(j as usize)?, 0, WittRingModel::ONE),
            Factor::Rho => self.free_element(FreeMono::ONE, 1, self.rho_lift),
            Factor::Tau | Factor::T(_) | Factor::T1(_) => Ok(KWHWElement::zero(deg)),
            Factor::XiBar(_) => Err(Error::NotInSubalgebra),
            Factor::Tau0 | Factor::C(_) | Factor::Ce(_) | Factor::C1(_) | Factor::XiTau(_) => {
                let a = self.eval_a(f, conv)?;
                self.torsion(self.shadow.to_kmhw_at(deg, &a)?)
            }
        }
    }

    /// The pair of a generator symbol, reading `c(∅) = 1`.
    pub fn theorem_generator(&self, f: Factor) -> Result<HWHWPair> {
        self.factor_pair(f, EmptyC::One)
    }

    fn factor_pair(&self, f: Factor, conv: EmptyC) -> Result<HWHWPair> {
        let b = self.eval_b(f, conv)?;
        let a = self.eval_a(f, conv)?;
        if f == Factor::Tau {
            return Ok(HWHWPair { deg: b.deg, a, b });
        }
        self.make_pair(a, b)
    }

    // ---- relations --------------------------------------------------------------

    fn free_part(&self, f: Factor, conv: EmptyC) -> Result<FreeMap> {
        let mut out = FreeMap::new();
        match f {
            Factor::S => {
                out.insert(FreeMono::s(), WittRingModel::ONE);
            }
            Factor::Tj(j) => {
                out.insert(FreeMono::t(j as usize)?, WittRingModel::ONE);
            }
            Factor::Rho if self.rho_lift != WittRingModel::ZERO => {
                out.insert(FreeMono::ONE, self.rho_lift);
            }
            Factor::Ce(1) => {
                out.insert(FreeMono::ONE, WittRingModel::ONE);
            }
            Factor::C(i) if i.is_empty() && conv == EmptyC::One => {
                out.insert(FreeMono::ONE, WittRingModel::ONE);
            }
            _ => {}
        }
        Ok(out)
    }

    /// The `A`-component and free part of a term. For compatible pairs the
    /// torsion part is `π(a) − r̄(free)`, so these two determine the element.
    fn eval_term(&self, t: &[Factor], conv: EmptyC, side: Side) -> Result<(AElement, FreeMap)> {
        let mut a = AElement::one();
        let mut free = FreeMap::new();
        free.insert(FreeMono::ONE, WittRingModel::ONE);
        let mut taus = 0;
        for &f in t {
            if f == Factor::Tau {
                taus += 1;
                continue;
            }
            a = self.alg().mul(&a, &self.eval_a(f, conv)?);
            free = self.free_mul(&free, &self.free_part(f, conv)?)?;
        }
        for _ in 0..taus {
            a = match side {
                Side::Left => self.alg().scale_left(&ScalarMono::tau_pow(1), &a),
                Side::Right => self.alg().right_scale(&a, &Scalar::mono(ScalarMono::tau_pow(1))),
            };
            free.clear();
        }
        Ok((a, free))
    }

    fn eval_expr(&self, e: &Expr, conv: EmptyC, side: Side) -> Result<(AElement, FreeMap)> {
        let mut a = AElement::zero();
        let mut free = FreeMap::new();
        for t in e {
            let (x, f) = self.eval_term(t, conv, side)?;
            a.add_assign(&x);
            for (m, w) in f {
                add_coeff(self.witt(), &mut free, m, w);
            }
        }
        Ok((a, free))
    }

    /// `x ∈ τ·HW`.
    pub fn in_tau_hw(&self, x: &AElement) -> bool {
        if x.iter().any(|m| m.tpow == 0) {
            return false;
        }
        let y: AElement = x.iter().map(|m| AMonomial::new(m.c, m.tpow - 1, m.pure)).collect();
        y.is_zero() || self.shadow.hw_expand(&y).is_ok()
    }

    fn holds(&self, lhs: &Expr, rhs: &Expr, target: Target, conv: EmptyC, side: Side) -> Result<bool> {
        let (la, lf) = self.eval_expr(lhs, conv, side)?;
        let (ra, rf) = self.eval_expr(rhs, conv, side)?;
        Ok(match target {
            Target::Hw => la == ra,
            Target::Pair => la == ra && lf == rf,
            Target::Kw => lf == rf && self.in_tau_hw(&la.add(&ra)),
        })
    }

    fn holding_sides(&self, lhs: &Expr, rhs: &Expr, target: Target, conv: EmptyC) -> (Vec<Side>, Option<String>) {
        let mut sides = Vec::new();
        let mut err = None;
        for side in [Side::Left, Side::Right] {
            match self.holds(lhs, rhs, target, conv, side) {
                Ok(true) => sides.push(side),
                Ok(false) => {}
                Err(e) => err = Some(format!("{e}")),
            }
        }
        (sides, err)
    }

    pub fn verify_relation(&self, r: &Relation) -> RelationCheck {
        let statement = format!("{} = {}", format_expr(&r.lhs), format_expr(&r.rhs));
        let (homogeneous, defect) = homogeneity(&r.lhs, &r.rhs, r.convention);
        let mut check = RelationCheck {
            id: r.id.clone(),
            family: r.family,
            target: r.target,
            params: r.params.clone(),
            statement,
            homogeneous,
            defect,
            status: RelationStatus::Fails,
            sides: Vec::new(),
            correction: None,
            detail: None,
            stated: r.stated,
        };
        if homogeneous {
            let (sides, err) = self.holding_sides(&r.lhs, &r.rhs, r.target, r.convention);
            if !sides.is_empty() {
                check.status = RelationStatus::Holds;
                check.sides = sides;
                return check;
            }
            check.detail = err;
        } else {
            check.detail = Some(format!("printed form is inhomogeneous (defect {})", defect.unwrap_or(Bidegree::ZERO)));
        }
        let rhs = r.corrected_rhs.as_ref().unwrap_or(&r.rhs);
        let mut notes = Vec::new();
        if let Some(c) = &r.correction {
            notes.push(c.clone());
        }
        if r.convention == EmptyC::One {
            notes.push("c(∅) read as the empty sum".into());
        }
        if notes.is_empty() || !homogeneity(&r.lhs, rhs, EmptyC::Zero).0 {
            return check;
        }
        let (sides, err) = self.holding_sides(&r.lhs, rhs, r.target, EmptyC::Zero);
        if !sides.is_empty() {
            check.status = RelationStatus::FailsAsPrintedHoldsWithCorrection;
            check.sides = sides;
            check.correction = Some(notes.join("; "));
        } else if check.detail.is_none() {
            check.detail = err;
        }
        check
    }

    /// Verifies the catalog and adds a consistency record for each printed
    /// reading `c(∅) = 1`.
    pub fn verify_catalog(&self, rels: &[Relation]) -> Vec<RelationCheck> {
        let mut out: Vec<RelationCheck> = rels.iter().map(|r| self.verify_relation(r)).collect();
        for fam in [Family::KwPresentation, Family::MainTheorem] {
            if !rels.iter().any(|r| r.family == fam) {
                continue;
            }
            let target = if fam == Family::KwPresentation { Target::Kw } else { Target::Pair };
            let mut broken = Vec::new();
            for r in rels.iter().filter(|r| mentions_empty_c(r)) {
                let rt = if r.target == Target::Hw { Target::Hw } else { target };
                if homogeneity(&r.lhs, &r.rhs, EmptyC::One).0 && self.holding_sides(&r.lhs, &r.rhs, rt, EmptyC::One).0.is_empty() {
                    broken.push(format!("{}{}", r.id, r.params));
                }
            }
            let ok = broken.is_empty();
            out.push(RelationCheck {
                id: format!("{}.c-empty", family_prefix(fam)),
                family: fam,
                target,
                params: String::new(),
                statement: "c{} = 1".into(),
                homogeneous: true,
                defect: None,
                status: if ok { RelationStatus::Holds } else { RelationStatus::FailsAsPrintedHoldsWithCorrection },
                sides: vec![Side::Left, Side::Right],
                correction: (!ok).then(|| "c(∅) = 0, the empty sum".into()),
                detail: (!ok).then(|| {
                    let n = broken.len();
                    broken.truncate(6);
                    format!("{n} relations with an empty index fail under c(∅) = 1, e.g. {}", broken.join(", "))
                }),
                stated: true,
            });
        }
        out
    }

    // ---- basis and torsion ---------------------------------------------------------

    /// Irreducible monomials in the generators of bidegree `b` (with `k^M`
    /// coefficients and `t(∅) = τ`), mapped to `HW_b` and ranked.
    pub fn independence_check(&self, b: Bidegree, rules: RuleSet) -> Result<IndependenceReport> {
        let mons = self.basis_monomials(b, rules)?;
        let amb = self.shadow.ambient(b);
        let mut r = Reducer::new(amb.dim());
        let mut dependency = None;
        for (k, (_, x)) in mons.iter().enumerate() {
            let v = amb.to_vec(x)?;
            if dependency.is_none() {
                if let Some(combo) = r.solve(&v) {
                    let mut names: Vec<String> = combo.iter().map(|&i| mons[i].0.clone()).collect();
                    names.push(mons[k].0.clone());
                    dependency = Some(names);
                }
            }
            r.insert(&v);
        }
        let ker = matrix_of(&self.shadow, MapId::DLeft, b)?.analyze().kernel.len();
        let target_dim = self.shadow.kmhw_space(b).tau_rank + ker;
        Ok(IndependenceReport {
            bidegree: b,
            rules,
            monomials: mons.iter().map(|m| m.0.clone()).collect(),
            rank: r.rank(),
            independent: r.rank() == mons.len(),
            target_dim,
            spans: r.rank() == target_dim,
            dependency,
        })
    }

    /// Named irreducible generator monomials at `b` and their images in `A`.
    pub fn basis_monomials(&self, b: Bidegree, rules: RuleSet) -> Result<Vec<(String, AElement)>> {
        let gens = formal_generators(b.p + (b.p - 2 * b.q).max(0));
        let preset = self.alg().preset().clone();
        let mut out = Vec::new();
        let excess = b.p - 2 * b.q;
        for d in 0..=excess.max(0) as u32 {
            for c in preset.km_basis(d) {
                let target = b + Bidegree::km(d).scale(-1);
                let mut stack: Vec<(usize, Vec<Factor>, Bidegree)> = vec![(0, Vec::new(), Bidegree::ZERO)];
                while let Some((start, fs, deg)) = stack.pop() {
                    if deg.p == target.p && deg.q >= target.q {
                        let mut all = fs.clone();
                        for _ in 0..(deg.q - target.q) {
                            all.push(Factor::T(IndexSet::EMPTY));
                        }
                        if !formally_reducible(&all, rules) {
                            let mut x = self.alg().km_elt(c);
                            for f in &all {
                                x = self.alg().mul(&x, &self.eval_a(*f, EmptyC::Zero)?);
                            }
                            let mut name = if c.is_one() { String::new() } else { format!("{}*", preset.format_km(&c)) };
                            name.push_str(&all.iter().map(Factor::name).collect::<Vec<_>>().join("*"));
                            if all.is_empty() {
                                name.push('1');
                            }
                            out.push((name, x));
                        }
                    }
                    for (k, g) in gens.iter().enumerate().skip(start) {
                        let nd = deg + g.bidegree();
                        if nd.p <= target.p {
                            let mut nf = fs.clone();
                            nf.push(*g);
                            stack.push((k, nf, nd));
                        }
                    }
                }
            }
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        Ok(out)
    }

    /// `η`-torsion is exactly the boundary span, `r̄` hits `ker d_left`, and
    /// `η` is injective on the free part.
    pub fn eta_torsion_check(&self, b: Bidegree) -> Result<EtaTorsionReport> {
        let span = compare_kernel_span(&self.shadow, b)?;
        let preset = self.alg().preset().clone();
        let mut r = (*self.image_reducer(b)?).clone();
        let mut higher_torsion_free = true;
        for m in free_monomials() {
            let Some(n) = Self::coefficient_degree(b, &m) else { continue };
            for &w in self.tower.group(n) {
                if w == WittRingModel::ZERO {
                    continue;
                }
                let e1 = self.tower.eta(n - 1, w)?;
                let e2 = self.tower.eta(n - 2, e1)?;
                higher_torsion_free &= e1 != WittRingModel::ZERO && e2 != WittRingModel::ZERO;
            }
            if n < 0 {
                continue;
            }
            for c in preset.km_basis(n as u32) {
                let w = self.tower.lift(&preset, n, &preset.km_from_mono(c)).ok_or(Error::NotInImage)?;
                let x = self.free_element(m, n, w)?;
                r.insert(&self.shadow.kmhw_coords(&self.residue(&x)?));
            }
        }
        let matches = span.boundary_span_rank == span.dim_im && r.rank() == span.dim_ker && higher_torsion_free;
        Ok(EtaTorsionReport {
            bidegree: b,
            dim_torsion: span.dim_im,
            boundary_span_rank: span.boundary_span_rank,
            dim_ker: span.dim_ker,
            residue_image_rank: r.rank(),
            higher_torsion_free,
            matches,
        })
    }
}

impl FreeMono {
    pub fn is_one(&self) -> bool {
        *self == FreeMono::ONE
    }
}

fn add_coeff(w: &WittRingModel, map: &mut BTreeMap<FreeMono, WittIx>, m: FreeMono, c: WittIx) {
    let v = w.add(map.get(&m).copied().unwrap_or(WittRingModel::ZERO), c);
    if v == WittRingModel::ZERO {
        map.remove(&m);
    } else {
        map.insert(m, v);
    }
}

fn free_monomials() -> Vec<FreeMono> {
    let mut out = Vec::new();
    for s in [false, true] {
        for t in 0u8..(1 << (GEN_CAP - 1)) {
            out.push(FreeMono { s, t: t << 2 });
        }
    }
    out
}

/// Degree check of a relation; terms killed by `c(∅) = 0` are skipped.
fn homogeneity(lhs: &Expr, rhs: &Expr, conv: EmptyC) -> (bool, Option<Bidegree>) {
    let live = |t: &&Vec<Factor>| conv == EmptyC::One || !t.iter().any(|f| matches!(f, Factor::C(i) if i.is_empty()));
    let mut terms = lhs.iter().chain(rhs).filter(live);
    let Some(first) = terms.next() else { return (true, None) };
    let d = term_bidegree(first);
    for t in terms {
        let e = term_bidegree(t);
        if e != d {
            return (false, Some(d - e));
        }
    }
    (true, None)
}

fn mentions_empty_c(r: &Relation) -> bool {
    r.lhs.iter().chain(&r.rhs).flatten().any(|f| matches!(f, Factor::C(i) | Factor::C1(i) if i.is_empty()))
}

fn family_prefix(f: Family) -> &'static str {
    match f {
        Family::CRelations => "c",
        Family::TRelations => "t",
        Family::KwPresentation => "kw",
        Family::MainTheorem => "main",
    }
}

// ---- the relation catalog ---------------------------------------------------------

fn prod_ce(k: &IndexSet, shift: usize) -> Vec<Factor> {
    k.iter().map(|i| Factor::Ce((i + shift) as u8)).collect()
}

fn with(mut t: Vec<Factor>, more: &[Factor]) -> Vec<Factor> {
    t.extend_from_slice(more);
    t
}

/// `Σ_{i∈I∩J} c(e_i) g(IΔJ ⨿ i) Π_{j∈I∩J∖i} c(e_{j+1}) + Σ_{i∈I∖J} c(e_i) g(IΔJ∖i) Π_{j∈I∩J} c(e_{j+1})`.
fn cartan_sum(i: IndexSet, j: IndexSet, g: fn(IndexSet) -> Factor) -> Expr {
    let meet = i.intersection(&j);
    let delta = i.sym_diff(&j);
    let mut out = Vec::new();
    for k in meet.iter() {
        out.push(with(vec![Factor::Ce(k as u8), g(delta.union(&IndexSet::single(k).unwrap()))], &prod_ce(&meet.without(k), 1)));
    }
    for k in i.minus(&j).iter() {
        out.push(with(vec![Factor::Ce(k as u8), g(delta.without(k))], &prod_ce(&meet, 1)));
    }
    out
}

fn times(e: &Expr, f: &[Factor]) -> Expr {
    e.iter().map(|t| with(f.to_vec(), t)).collect()
}

/// `ρt₂ + ξ₂τ`.
fn rho_t2_xi2_tau() -> Expr {
    vec![vec![Factor::Rho, Factor::Tj(2)], vec![Factor::XiTau(2)]]
}

fn mul_expr(a: &Expr, b: &Expr) -> Expr {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(with(x.clone(), y));
        }
    }
    out
}

fn rel(id: &str, family: Family, target: Target, params: String, lhs: Expr, rhs: Expr, convention: EmptyC) -> Relation {
    Relation { id: id.into(), family, target, params, lhs, rhs, convention, corrected_rhs: None, correction: None, stated: true }
}

fn ij(i: IndexSet, j: IndexSet) -> String {
    format!("(I={i}, J={j})")
}

/// `c(I)c(J)`, `c(I)c₁(J)`, `c₁(I)c₁(J)` as left and right sides.
pub fn c_pair_relation(kind: u8, i: IndexSet, j: IndexSet) -> (Expr, Expr) {
    match kind {
        0 => (vec![vec![Factor::C(i), Factor::C(j)]], cartan_sum(i, j, Factor::C)),
        1 => (vec![vec![Factor::C(i), Factor::C1(j)]], cartan_sum(i, j, Factor::C1)),
        _ => {
            let meet = i.intersection(&j);
            let mut rhs = vec![with(vec![Factor::Tau0, Factor::C1(i.sym_diff(&j))], &prod_ce(&meet, 1))];
            rhs.extend(times(&rho_t2_xi2_tau(), &[Factor::C(i), Factor::C(j)]));
            (vec![vec![Factor::C1(i), Factor::C1(j)]], rhs)
        }
    }
}

/// The six products involving `t(I)`, `t₁(I)`; kind 0 is `t(I)t(J)` with the
/// `τ` needed for homogeneity.
pub fn t_pair_relation(kind: u8, i: IndexSet, j: IndexSet) -> (Expr, Expr) {
    let meet = i.intersection(&j);
    let delta = i.sym_diff(&j);
    let pc = prod_ce(&meet, 1);
    match kind {
        0 => (vec![vec![Factor::T(i), Factor::T(j)]], vec![with(vec![Factor::Tau, Factor::T(delta)], &pc)]),
        1 => (vec![vec![Factor::T(i), Factor::T1(j)]], vec![with(vec![Factor::Tau, Factor::T1(delta)], &pc)]),
        2 => (
            vec![vec![Factor::T1(i), Factor::T1(j)]],
            times(&rho_t2_xi2_tau(), &with(vec![Factor::Tau, Factor::T(delta)], &pc)),
        ),
        3 => (vec![vec![Factor::C(i), Factor::T(j)]], cartan_sum(i, j, Factor::T)),
        4 => {
            let mut rhs = vec![with(vec![Factor::Tau0, Factor::T(delta)], &pc)];
            rhs.extend(cartan_sum(i, j, Factor::T1));
            (vec![vec![Factor::C1(i), Factor::T(j)]], rhs)
        }
        _ => {
            let mut rhs = vec![with(vec![Factor::Tau0, Factor::T1(delta)], &pc)];
            rhs.extend(mul_expr(&rho_t2_xi2_tau(), &cartan_sum(i, j, Factor::T)));
            (vec![vec![Factor::C1(i), Factor::T1(j)]], rhs)
        }
    }
}

/// All relations, with index sets ranging over subsets of `{2, …, max_index}`.
pub fn relation_catalog(max_index: usize) -> Vec<Relation> {
    let sets = IndexSet::all_up_to(max_index);
    let e2 = IndexSet::single(2).unwrap();
    let mut out = Vec::new();
    use Factor::*;
    use Family::*;

    out.push(rel(
        "c.tau0-fourth",
        CRelations,
        Target::Hw,
        String::new(),
        vec![vec![Tau0; 4]],
        vec![
            vec![Rho, Rho, Rho, Tj(2)],
            vec![Rho, Rho, Rho, C1(e2)],
            vec![Rho, Rho, Tau, XiBar(2)],
            vec![Tau, Tau, Ce(2)],
        ],
        EmptyC::Zero,
    ));
    for &i in &sets {
        for &j in &sets {
            for (k, name) in ["c.cc", "c.cc1", "c.c1c1"].iter().enumerate() {
                let (l, r) = c_pair_relation(k as u8, i, j);
                out.push(rel(name, CRelations, Target::Hw, ij(i, j), l.clone(), r.clone(), EmptyC::Zero));
                out.push(rel(&format!("kw.{}", &name[2..]), KwPresentation, Target::Kw, ij(i, j), l, r, EmptyC::One));
            }
            let mut x = rel("main.c-t1", MainTheorem, Target::Pair, ij(i, j), vec![vec![C(i), T1(j)]], cartan_sum(i, j, T1), EmptyC::Zero);
            x.stated = false;
            out.push(x);
            for (k, name) in ["t.tt", "t.tt1", "t.t1t1", "t.ct", "t.c1t", "t.c1t1"].iter().enumerate() {
                let (l, r) = t_pair_relation(k as u8, i, j);
                let mut x = rel(name, TRelations, Target::Pair, ij(i, j), l, r.clone(), EmptyC::Zero);
                if k == 0 {
                    let meet = i.intersection(&j);
                    x.rhs = vec![with(vec![T(i.sym_diff(&j))], &prod_ce(&meet, 1))];
                    x.corrected_rhs = Some(r);
                    x.correction = Some("right side multiplied by τ".into());
                }
                out.push(x);
            }
        }
    }
    for &i in &sets {
        let p = format!("(I={i})");
        out.push(rel(
            "main.s-c1",
            MainTheorem,
            Target::Pair,
            p.clone(),
            vec![vec![S, C1(i)]],
            {
                let mut r = times(&rho_t2_xi2_tau(), &[Tau0, Tau0, Tau0, C(i)]);
                r.push(vec![Tau, T1(i), Ce(2)]);
                r
            },
            EmptyC::One,
        ));
        let mut x = rel(
            "main.s-c",
            MainTheorem,
            Target::Pair,
            p.clone(),
            vec![vec![S, C(i)]],
            vec![vec![Tau0, Tau0, Tau0, C1(i)], vec![Tau, T(i), Ce(2)]],
            EmptyC::Zero,
        );
        x.stated = false;
        out.push(x);
        out.push(rel("main.t-s", MainTheorem, Target::Pair, p.clone(), vec![vec![T(i), S]], vec![vec![T1(i), Tau0, Tau0, Tau0]], EmptyC::One));
        out.push(rel(
            "main.t1-s",
            MainTheorem,
            Target::Pair,
            p.clone(),
            vec![vec![T1(i), S]],
            times(&rho_t2_xi2_tau(), &[Tau0, Tau0, Tau0, T(i)]),
            EmptyC::One,
        ));
        let mut x = rel("kw.s-c", KwPresentation, Target::Kw, p.clone(), vec![vec![S, C(i)]], vec![vec![Tau0, Tau0, Tau0, C1(i)]], EmptyC::One);
        x.correction = Some("the printed b read as s".into());
        out.push(x);
        out.push(rel(
            "kw.s-c1",
            KwPresentation,
            Target::Kw,
            p,
            vec![vec![S, C1(i)]],
            vec![vec![Rho, Tau0, Tau0, Tau0, C1(e2), C(i)], vec![Rho, Tau0, Tau0, Tau0, Tj(2), C(i)]],
            EmptyC::One,
        ));
    }
    out.push(rel("main.tau0-fourth", MainTheorem, Target::Pair, String::new(), vec![vec![Tau0; 4]], vec![vec![Ce(2), Tau, Tau]], EmptyC::One));
    out.push(rel(
        "main.s-square",
        MainTheorem,
        Target::Pair,
        String::new(),
        vec![vec![S, S]],
        times(&rho_t2_xi2_tau(), &[Tau0, Tau0, Ce(2), Tau, Tau]),
        EmptyC::One,
    ));
    out.push(rel("kw.c1-empty", KwPresentation, Target::Kw, String::new(), vec![vec![C1(IndexSet::EMPTY)]], vec![vec![Tau0]], EmptyC::One));
    out.push(rel("kw.tau0-fourth", KwPresentation, Target::Kw, String::new(), vec![vec![Tau0; 4]], Vec::new(), EmptyC::One));
    out.push(rel("kw.s-square", KwPresentation, Target::Kw, String::new(), vec![vec![S, S]], Vec::new(), EmptyC::One));
    out.push(rel("kw.s-tau0", KwPresentation, Target::Kw, String::new(), vec![vec![S, Tau0]], Vec::new(), EmptyC::One));
    for j in 2..max_index.min(GEN_CAP) as u8 + 1 {
        if j as usize + 1 > GEN_CAP {
            break;
        }
        let lhs = vec![vec![Tj(j), Tj(j)]];
        let rhs = vec![vec![Rho, Tj(j + 1)], vec![XiTau(j + 1)]];
        let p = format!("(j={j})");
        out.push(rel("main.t-square", MainTheorem, Target::Pair, p.clone(), lhs.clone(), rhs.clone(), EmptyC::One));
        out.push(rel("kw.t-square", KwPresentation, Target::Kw, p, lhs, rhs, EmptyC::One));
    }
    out
}

// ---- normal forms ---------------------------------------------------------------

/// Generators other than `τ = t(∅)` with `p ≤ p_max`.
fn formal_generators(p_max: i32) -> Vec<Factor> {
    let mut g = vec![Factor::Tau0, Factor::S];
    for j in 2..=GEN_CAP as u8 {
        g.push(Factor::Tj(j));
    }
    for i in IndexSet::all_up_to(GEN_CAP) {
        if !i.is_empty() {
            g.push(Factor::C(i));
            g.push(Factor::C1(i));
            g.push(Factor::T(i));
        }
        g.push(Factor::T1(i));
    }
    g.retain(|f| f.bidegree().p <= p_max);
    g.sort();
    g
}

/// Canonical spelling: `c(e_k) → c({k})`, `τ₀ → c₁(∅)`, `τ → t(∅)`; `None` when
/// the term vanishes through `c(∅) = 0`.
fn normalize_term(t: &[Factor]) -> Option<Vec<Factor>> {
    let mut out = Vec::new();
    for &f in t {
        match f {
            Factor::Ce(1) => {}
            Factor::Ce(k) => out.push(Factor::C(IndexSet::single(k as usize).ok()?)),
            Factor::Tau0 => out.push(Factor::C1(IndexSet::EMPTY)),
            Factor::Tau => out.push(Factor::T(IndexSet::EMPTY)),
            Factor::C(i) if i.is_empty() => return None,
            f => out.push(f),
        }
    }
    out.sort();
    Some(out)
}

fn normalize_expr(e: &Expr) -> BTreeSet<Vec<Factor>> {
    let mut out = BTreeSet::new();
    for t in e {
        if let Some(n) = normalize_term(t) {
            if !out.remove(&n) {
                out.insert(n);
            }
        }
    }
    out
}

fn rewrites(lhs: &Expr, rhs: &Expr) -> bool {
    normalize_expr(lhs) != normalize_expr(rhs)
}

/// Whether a product of two generators is the left side of a relation that
/// changes it.
fn pair_reducible(x: Factor, y: Factor) -> bool {
    use Factor::*;
    let canon = |f: Factor| match f {
        Tau0 => C1(IndexSet::EMPTY),
        Tau => T(IndexSet::EMPTY),
        f => f,
    };
    let (x, y) = (canon(x), canon(y));
    let try_pair = |x: Factor, y: Factor| -> Option<bool> {
        let (l, r) = match (x, y) {
            (C(i), C(j)) => c_pair_relation(0, i, j),
            (C(i), C1(j)) => c_pair_relation(1, i, j),
            (C1(i), C1(j)) => c_pair_relation(2, i, j),
            (T(i), T(j)) => t_pair_relation(0, i, j),
            (T(i), T1(j)) => t_pair_relation(1, i, j),
            (T1(i), T1(j)) => t_pair_relation(2, i, j),
            (C(i), T(j)) => t_pair_relation(3, i, j),
            (C1(i), T(j)) => t_pair_relation(4, i, j),
            (C1(i), T1(j)) => t_pair_relation(5, i, j),
            _ => return None,
        };
        Some(rewrites(&l, &r))
    };
    try_pair(x, y).or_else(|| try_pair(y, x)).unwrap_or(false)
}

/// Whether a generator monomial contains the left side of a relation.
pub fn formally_reducible(fs: &[Factor], rules: RuleSet) -> bool {
    let count = |p: &dyn Fn(&Factor) -> bool| fs.iter().filter(|f| p(f)).count();
    if count(&|f| *f == Factor::Tau0) >= 4 || count(&|f| *f == Factor::S) >= 2 {
        return true;
    }
    for j in 2..=GEN_CAP as u8 {
        if count(&|f| *f == Factor::Tj(j)) >= 2 {
            return true;
        }
    }
    if fs.contains(&Factor::S)
        && fs.iter().any(|f| matches!(f, Factor::Tau0 | Factor::Tau | Factor::C1(_) | Factor::T(_) | Factor::T1(_)))
    {
        return true;
    }
    if rules == RuleSet::Completed {
        if fs.contains(&Factor::S) && fs.iter().any(|f| matches!(f, Factor::C(_))) {
            return true;
        }
        if count(&|f| *f == Factor::Tau0) == 3 {
            for f in fs {
                let Factor::C1(k) = f else { continue };
                let Some(top) = k.iter().last() else { continue };
                if fs.iter().any(|g| matches!(g, Factor::C(e) if e.len() == 1 && e.iter().all(|i| i > top))) {
                    return true;
                }
            }
        }
        for a in fs {
            for b in fs {
                if let (Factor::C(i), Factor::T1(j)) = (*a, *b) {
                    if rewrites(&vec![vec![*a, *b]], &cartan_sum(i, j, Factor::T1)) {
                        return true;
                    }
                }
            }
        }
    }
    for a in 0..fs.len() {
        for b in a + 1..fs.len() {
            if pair_reducible(fs[a], fs[b]) {
                return true;
            }
        }
    }
    false
}
