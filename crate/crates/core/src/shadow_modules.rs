//! Homology modules realized inside or as quotients of the dual Steenrod algebra `A`:
//!
//! * `HW`: the subalgebra of `A` spanned by `τ(E)(ξ̄₁τ)^ε ξ̄₁^{2R₁} ξ̄₂^{R₂}⋯`,
//!   where `ξ̄₁τ = ξ̄₁ · η_R(τ)`;
//! * `HKM = A / A·η_R(τ)`, with the derivation `d_right` induced by `(Sq²)^R`;
//! * `KMHW = HW / τ·HW`, with the derivation `d_left` induced by `(Sq²)^L`.
//!
//! Every space is built per bidegree as a subspace or quotient of `A_b` and
//! cached. Quotient representatives are reduced against a fixed echelon
//! basis, so they are the canonical-order minima of their classes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_data::KmMono;
use crate::linalg::{BitVec, F2Matrix, Reducer};
use crate::milnor_dual::{
    format_pure, AElement, AMonomial, Bidegree, DualSteenrod, Pure, Scalar, ScalarMono, Side, SteenrodOp, GEN_CAP,
};

/// A finite set of indices in `2..=GEN_CAP+1`, stored as bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct IndexSet(u16);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);
    pub const MAX_INDEX: usize = GEN_CAP + 1;

    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u16;
        for i in indices {
            if !(2..=Self::MAX_INDEX).contains(&i) {
                return Err(Error::MalformedIndexSet(format!("index {i} outside 2..={}", Self::MAX_INDEX)));
            }
            bits |= 1 << i;
        }
        Ok(IndexSet(bits))
    }

    /// `e_i`.
    pub fn single(i: usize) -> Result<Self> {
        Self::new([i])
    }

    /// All subsets of `{2, …, max}`.
    pub fn all_up_to(max: usize) -> Vec<IndexSet> {
        let n = max.saturating_sub(1);
        (0u16..(1 << n)).map(|m| IndexSet(m << 2)).collect()
    }

    pub fn bits(&self) -> u16 {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 16 && self.0 >> i & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (2..=Self::MAX_INDEX).filter(move |&i| self.contains(i))
    }

    pub fn union(&self, o: &IndexSet) -> IndexSet {
        IndexSet(self.0 | o.0)
    }

    pub fn intersection(&self, o: &IndexSet) -> IndexSet {
        IndexSet(self.0 & o.0)
    }

    pub fn sym_diff(&self, o: &IndexSet) -> IndexSet {
        IndexSet(self.0 ^ o.0)
    }

    pub fn minus(&self, o: &IndexSet) -> IndexSet {
        IndexSet(self.0 & !o.0)
    }

    pub fn without(&self, i: usize) -> IndexSet {
        IndexSet(self.0 & !(1 << i))
    }

    /// `I ⨿ J`; errors when the sets overlap.
    pub fn disjoint_union(&self, o: &IndexSet) -> Result<IndexSet> {
        if self.0 & o.0 != 0 {
            Err(Error::IndexOverlap)
        } else {
            Ok(IndexSet(self.0 | o.0))
        }
    }

    /// `ξ(I)` as a pure monomial (the conjugate is taken by callers).
    pub fn xi_pure(&self) -> Result<Pure> {
        let mut r = [0u8; GEN_CAP];
        for i in self.iter() {
            if i > GEN_CAP {
                return Err(Error::GeneratorCap(i));
            }
            r[i - 1] = 1;
        }
        Ok(Pure::from_parts(0, r))
    }

    /// Bidegree of `ξ̄(I)`.
    pub fn xi_bidegree(&self) -> Bidegree {
        self.iter().fold(Bidegree::ZERO, |b, i| b + Bidegree::xi_i(i))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.iter().map(|i| format!("{i}")).collect();
        write!(f, "{{{}}}", v.join(","))
    }
}

/// A basis monomial `c τ^k τ(E) (ξ̄₁τ)^ε ξ̄(R)` of `HW` (with `R₁` even).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HwCert {
    pub c: KmMono,
    pub tpow: u16,
    pub eps: bool,
    /// `τ(E) ξ(R)` as a pure monomial; its `ξ` exponents are those of `ξ̄(R)`.
    pub pure: Pure,
}

impl HwCert {
    pub fn bidegree(&self) -> Bidegree {
        let mut b = ScalarMono { c: self.c, tpow: self.tpow }.bidegree() + self.pure.bidegree();
        if self.eps {
            b = b + Bidegree::new(2, 0);
        }
        b
    }
}

/// An element of `HW` with its expansion in the basis monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HWElement {
    pub elt: AElement,
    pub cert: BTreeSet<HwCert>,
}

/// A class in `HKM = A / A·η_R(τ)`, stored by its reduced representative.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HKMElement {
    pub deg: Bidegree,
    pub rep: AElement,
}

impl HKMElement {
    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }
}

/// A basis monomial `c τ₀^{e0} τ(E') ξ̄(R)` of `KMHW` over `k^M`
/// (`e0 ≤ 3`, `E'` without `τ₀`, `R₁` even).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KmHwMono {
    pub c: KmMono,
    pub e0: u8,
    pub pure: Pure,
}

impl KmHwMono {
    pub fn bidegree(&self) -> Bidegree {
        Bidegree::km(self.c.degree()) + Bidegree::tau_i(0).scale(self.e0 as i32) + self.pure.bidegree()
    }
}

/// A class in `KMHW = HW / τ·HW` expanded in the monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KMHWElement {
    pub deg: Bidegree,
    pub terms: BTreeSet<KmHwMono>,
}

impl KMHWElement {
    pub fn zero(deg: Bidegree) -> Self {
        KMHWElement { deg, terms: BTreeSet::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &KMHWElement) -> KMHWElement {
        let mut terms = self.terms.clone();
        for t in &o.terms {
            if !terms.remove(t) {
                terms.insert(*t);
            }
        }
        KMHWElement { deg: self.deg, terms }
    }
}

/// Basis of `A_b` with positions.
pub struct Ambient {
    pub basis: Vec<AMonomial>,
    index: BTreeMap<AMonomial, usize>,
}

impl Ambient {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_vec(&self, x: &AElement) -> Result<BitVec> {
        let mut v = BitVec::zeros(self.basis.len());
        for m in x.iter() {
            match self.index.get(m) {
                Some(&i) => v.flip(i),
                None => return Err(Error::InvalidElement(format!("monomial of bidegree {} outside the space", m.bidegree()))),
            }
        }
        Ok(v)
    }

    pub fn to_elt(&self, v: &BitVec) -> AElement {
        v.ones().map(|i| self.basis[i]).collect()
    }
}

/// `HW_b`: certificate monomials and their (independent) images in `A_b`.
pub struct HwSpace {
    pub certs: Vec<HwCert>,
    pub images: Vec<AElement>,
    reducer: Reducer,
    /// Insertion ids that were dependent on earlier ones.
    pub dependent: Vec<usize>,
}

impl HwSpace {
    pub fn dim(&self) -> usize {
        self.reducer.rank()
    }
}

/// `HKM_b`: echelon basis of `A_{b+(0,1)}·η_R(τ)` in `A_b` and the transversal.
pub struct HkmSpace {
    reducer: Reducer,
    pub transversal: Vec<usize>,
    position: BTreeMap<usize, usize>,
}

impl HkmSpace {
    pub fn dim(&self) -> usize {
        self.transversal.len()
    }
}

/// `KMHW_b`: echelon basis of `τ·HW_{b+(0,1)} + span(monomial lifts)` in `A_b`.
pub struct KmhwSpace {
    reducer: Reducer,
    n_tau: usize,
    pub monomials: Vec<KmHwMono>,
    pub lifts: Vec<AElement>,
    /// Monomial lifts that were dependent modulo `τ·HW`.
    pub dependent: Vec<KmHwMono>,
    /// Dimension of `τ·HW_{b+(0,1)}`.
    pub tau_rank: usize,
}

impl KmhwSpace {
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }
}

/// Shadow module computations over one preset.
pub struct ShadowModules {
    alg: DualSteenrod,
    ambient: RefCell<BTreeMap<Bidegree, Rc<Ambient>>>,
    hw: RefCell<BTreeMap<Bidegree, Rc<HwSpace>>>,
    hkm: RefCell<BTreeMap<Bidegree, Rc<HkmSpace>>>,
    kmhw: RefCell<BTreeMap<Bidegree, Rc<KmhwSpace>>>,
    calls: Cell<u64>,
    /// Check lift independence on every `n`-th call (0 disables).
    check_every: Cell<u64>,
}

impl ShadowModules {
    pub fn new(alg: DualSteenrod) -> Self {
        ShadowModules {
            alg,
            ambient: RefCell::new(BTreeMap::new()),
            hw: RefCell::new(BTreeMap::new()),
            hkm: RefCell::new(BTreeMap::new()),
            kmhw: RefCell::new(BTreeMap::new()),
            calls: Cell::new(0),
            check_every: Cell::new(if cfg!(debug_assertions) { 1 } else { 64 }),
        }
    }

    pub fn alg(&self) -> &DualSteenrod {
        &self.alg
    }

    pub fn set_lift_check_interval(&self, n: u64) {
        self.check_every.set(n);
    }

    fn sample_check(&self) -> bool {
        let n = self.check_every.get();
        let c = self.calls.get();
        self.calls.set(c + 1);
        n != 0 && c.is_multiple_of(n)
    }

    pub fn ambient(&self, b: Bidegree) -> Rc<Ambient> {
        if let Some(a) = self.ambient.borrow().get(&b) {
            return a.clone();
        }
        let basis = self.alg.basis(b);
        let index = basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let a = Rc::new(Ambient { basis, index });
        self.ambient.borrow_mut().insert(b, a.clone());
        a
    }

    // ---- HW ---------------------------------------------------------------------

    /// `ξ̄₁ · η_R(τ)`.
    pub fn xi1_bar_tau(&self) -> AElement {
        self.alg.mul(&self.alg.xi_bar_pow(1, 1), &self.alg.eta_r_tau_pow(1))
    }

    pub fn cert_image(&self, c: &HwCert) -> AElement {
        let a = &self.alg;
        let tau_part = Pure::from_parts(c.pure.e_bits(), [0; GEN_CAP]);
        let xi_part = Pure::from_parts(0, xi_exps(&c.pure));
        let mut x = a.mul(&AElement::from_pure(tau_part), &a.conjugate_pure(xi_part));
        if c.eps {
            x = a.mul(&x, &self.xi1_bar_tau());
        }
        a.scale_left(&ScalarMono { c: c.c, tpow: c.tpow }, &x)
    }

    /// Certificate monomials of bidegree `b` in canonical order.
    pub fn hw_certs(&self, b: Bidegree) -> Vec<HwCert> {
        let mut out = Vec::new();
        let excess = b.p - 2 * b.q;
        for eps in [false, true] {
            for d in 0..=excess.max(0) as u32 {
                for c in self.alg.preset().km_basis(d) {
                    let mut k = 0i32;
                    loop {
                        let s = ScalarMono { c, tpow: k as u16 };
                        let mut pb = b - s.bidegree();
                        if eps {
                            pb = pb - Bidegree::new(2, 0);
                        }
                        if pb.p - 2 * pb.q < 0 {
                            break;
                        }
                        for p in self.alg.pure_basis(pb).iter() {
                            if p.xi_exp(1) % 2 == 0 {
                                out.push(HwCert { c, tpow: k as u16, eps, pure: *p });
                            }
                        }
                        k += 1;
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn hw_space(&self, b: Bidegree) -> Rc<HwSpace> {
        if let Some(s) = self.hw.borrow().get(&b) {
            return s.clone();
        }
        let amb = self.ambient(b);
        let certs = self.hw_certs(b);
        let mut reducer = Reducer::new(amb.dim());
        let mut images = Vec::with_capacity(certs.len());
        let mut dependent = Vec::new();
        for (i, c) in certs.iter().enumerate() {
            let img = self.cert_image(c);
            let v = amb.to_vec(&img).expect("certificate image is homogeneous");
            if reducer.insert(&v).is_none() {
                dependent.push(i);
            }
            images.push(img);
        }
        let s = Rc::new(HwSpace { certs, images, reducer, dependent });
        self.hw.borrow_mut().insert(b, s.clone());
        s
    }

    /// Membership in `HW` by an exact linear solve; returns the certificate.
    pub fn hw_expand(&self, x: &AElement) -> Result<HWElement> {
        let mut cert = BTreeSet::new();
        for b in x.bidegrees() {
            let space = self.hw_space(b);
            let amb = self.ambient(b);
            let v = amb.to_vec(&x.component(b))?;
            let combo = space.reducer.solve(&v).ok_or(Error::NotInSubalgebra)?;
            for i in combo {
                cert.insert(space.certs[i]);
            }
        }
        Ok(HWElement { elt: x.clone(), cert })
    }

    // ---- HKM --------------------------------------------------------------------

    pub fn hkm_space(&self, b: Bidegree) -> Rc<HkmSpace> {
        if let Some(s) = self.hkm.borrow().get(&b) {
            return s.clone();
        }
        let amb = self.ambient(b);
        let src = self.ambient(b + Bidegree::new(0, 1));
        let eta = self.alg.eta_r_tau_pow(1);
        let mut reducer = Reducer::new(amb.dim());
        for m in &src.basis {
            let img = self.alg.mul(&AElement::from_mono(*m), &eta);
            reducer.insert(&amb.to_vec(&img).expect("homogeneous"));
        }
        let transversal = reducer.free_positions();
        let position = transversal.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let s = Rc::new(HkmSpace { reducer, transversal, position });
        self.hkm.borrow_mut().insert(b, s.clone());
        s
    }

    pub fn hkm_basis(&self, b: Bidegree) -> Vec<AMonomial> {
        let amb = self.ambient(b);
        self.hkm_space(b).transversal.iter().map(|&i| amb.basis[i]).collect()
    }

    /// Class of a homogeneous `x` (of bidegree `b`) in `HKM`.
    pub fn to_hkm_at(&self, b: Bidegree, x: &AElement) -> Result<HKMElement> {
        let amb = self.ambient(b);
        let mut v = amb.to_vec(x)?;
        self.hkm_space(b).reducer.reduce(&mut v);
        Ok(HKMElement { deg: b, rep: amb.to_elt(&v) })
    }

    pub fn to_hkm(&self, x: &AElement) -> Result<HKMElement> {
        let b = homogeneous(x)?;
        self.to_hkm_at(b, x)
    }

    /// Coordinates of a class in the transversal basis.
    pub fn hkm_coords(&self, x: &HKMElement) -> BitVec {
        let s = self.hkm_space(x.deg);
        let amb = self.ambient(x.deg);
        let v = amb.to_vec(&x.rep).expect("representative");
        BitVec::from_ones(s.dim(), v.ones().map(|i| s.position[&i]))
    }

    /// `d_right = π ∘ (Sq²)^R ∘ lift`.
    pub fn d_right(&self, x: &HKMElement) -> HKMElement {
        let target = x.deg - Bidegree::d_shift();
        let y = self.alg.act(SteenrodOp::Sq2, Side::Right, &x.rep);
        let out = self.to_hkm_at(target, &y).expect("Sq² is homogeneous");
        if self.sample_check() {
            let src = self.ambient(x.deg + Bidegree::new(0, 1));
            if let Some(m) = src.basis.first() {
                let shift = self.alg.mul(&AElement::from_mono(*m), &self.alg.eta_r_tau_pow(1));
                let other = x.rep.add(&shift);
                let y2 = self.alg.act(SteenrodOp::Sq2, Side::Right, &other);
                assert_eq!(self.to_hkm_at(target, &y2).unwrap(), out, "d_right depends on the lift");
            }
        }
        out
    }

    /// `K`-type monomials `c τ(E) ξ̄₁^{2R₁} ξ̄₂^{R₂}⋯` of bidegree `b`.
    pub fn hkw_presentation_basis(&self, b: Bidegree) -> Vec<(KmMono, Pure)> {
        let mut out = Vec::new();
        let excess = b.p - 2 * b.q;
        for d in 0..=excess.max(0) as u32 {
            for c in self.alg.preset().km_basis(d) {
                let pb = b + Bidegree::new(d as i32, d as i32);
                for p in self.alg.pure_basis(pb).iter() {
                    if p.xi_exp(1) % 2 == 0 {
                        out.push((c, *p));
                    }
                }
            }
        }
        out
    }

    /// `c · τ(E) ξ̄(R)` in `A`.
    pub fn k_monomial(&self, c: KmMono, p: Pure) -> AElement {
        let tau_part = Pure::from_parts(p.e_bits(), [0; GEN_CAP]);
        let xi_part = Pure::from_parts(0, xi_exps(&p));
        let x = self.alg.mul(&AElement::from_pure(tau_part), &self.alg.conjugate_pure(xi_part));
        self.alg.scale_left(&ScalarMono { c, tpow: 0 }, &x)
    }

    // ---- KMHW -------------------------------------------------------------------

    /// `k^M`-basis monomials of `KMHW` in bidegree `b`.
    pub fn kmhw_monomials(&self, b: Bidegree) -> Vec<KmHwMono> {
        let mut out = Vec::new();
        let excess = b.p - 2 * b.q;
        for d in 0..=excess.max(0) as u32 {
            for c in self.alg.preset().km_basis(d) {
                for e0 in 0..4u8 {
                    let pb = b + Bidegree::new(d as i32, d as i32) - Bidegree::tau_i(0).scale(e0 as i32);
                    for p in self.alg.pure_basis(pb).iter() {
                        if !p.has_tau(0) && p.xi_exp(1) % 2 == 0 {
                            out.push(KmHwMono { c, e0, pure: *p });
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Lift of a basis monomial to `HW ⊂ A`.
    pub fn kmhw_lift(&self, m: &KmHwMono) -> AElement {
        let t0 = self.alg.pow(&self.alg.tau_gen(0), m.e0 as u32);
        let rest = self.k_monomial(KmMono::ONE, m.pure);
        let x = self.alg.mul(&t0, &rest);
        self.alg.scale_left(&ScalarMono { c: m.c, tpow: 0 }, &x)
    }

    pub fn kmhw_space(&self, b: Bidegree) -> Rc<KmhwSpace> {
        if let Some(s) = self.kmhw.borrow().get(&b) {
            return s.clone();
        }
        let amb = self.ambient(b);
        let above = self.hw_space(b + Bidegree::new(0, 1));
        let mut reducer = Reducer::new(amb.dim());
        for img in &above.images {
            let t = self.alg.scale_left(&ScalarMono::tau_pow(1), img);
            reducer.insert(&amb.to_vec(&t).expect("homogeneous"));
        }
        let n_tau = reducer.inserted();
        let tau_rank = reducer.rank();
        let mut monomials = Vec::new();
        let mut lifts = Vec::new();
        let mut dependent = Vec::new();
        for m in self.kmhw_monomials(b) {
            let lift = self.kmhw_lift(&m);
            let v = amb.to_vec(&lift).expect("homogeneous");
            // Keep insertion ids aligned with `monomials`.
            if reducer.contains(&v) {
                dependent.push(m);
                continue;
            }
            reducer.insert(&v);
            monomials.push(m);
            lifts.push(lift);
        }
        let s = Rc::new(KmhwSpace { reducer, n_tau, monomials, lifts, dependent, tau_rank });
        self.kmhw.borrow_mut().insert(b, s.clone());
        s
    }

    /// Class of a homogeneous element of `HW` modulo `τ·HW`.
    pub fn to_kmhw_at(&self, b: Bidegree, x: &AElement) -> Result<KMHWElement> {
        let s = self.kmhw_space(b);
        let amb = self.ambient(b);
        let v = amb.to_vec(x)?;
        let combo = s.reducer.solve(&v).ok_or(Error::NotInSubalgebra)?;
        let terms = combo.into_iter().filter(|&i| i >= s.n_tau).map(|i| s.monomials[i - s.n_tau]).collect();
        Ok(KMHWElement { deg: b, terms })
    }

    pub fn to_kmhw(&self, x: &AElement) -> Result<KMHWElement> {
        let b = homogeneous(x)?;
        self.to_kmhw_at(b, x)
    }

    pub fn kmhw_lift_elt(&self, x: &KMHWElement) -> AElement {
        let mut out = AElement::zero();
        for m in &x.terms {
            out.add_assign(&self.kmhw_lift(m));
        }
        out
    }

    pub fn kmhw_coords(&self, x: &KMHWElement) -> BitVec {
        let s = self.kmhw_space(x.deg);
        BitVec::from_ones(
            s.dim(),
            x.terms.iter().map(|m| s.monomials.binary_search(m).expect("basis monomial")),
        )
    }

    pub fn kmhw_mul(&self, x: &KMHWElement, y: &KMHWElement) -> Result<KMHWElement> {
        let p = self.alg.mul(&self.kmhw_lift_elt(x), &self.kmhw_lift_elt(y));
        self.to_kmhw_at(x.deg + y.deg, &p)
    }

    /// `d_left = π ∘ (Sq²)^L ∘ lift`.
    pub fn d_left(&self, x: &KMHWElement) -> Result<KMHWElement> {
        let target = x.deg - Bidegree::d_shift();
        let lift = self.kmhw_lift_elt(x);
        let y = self.alg.act(SteenrodOp::Sq2, Side::Left, &lift);
        let out = self.to_kmhw_at(target, &y)?;
        if self.sample_check() {
            let above = self.hw_space(x.deg + Bidegree::new(0, 1));
            if let Some(h) = above.images.first() {
                let other = lift.add(&self.alg.scale_left(&ScalarMono::tau_pow(1), h));
                let y2 = self.alg.act(SteenrodOp::Sq2, Side::Left, &other);
                assert_eq!(self.to_kmhw_at(target, &y2)?, out, "d_left depends on the lift");
            }
        }
        Ok(out)
    }

    // ---- matrices and structural checks --------------------------------------------

    /// Matrix of `d_right: HKM_b → HKM_{b-(2,1)}` in transversal bases.
    pub fn d_right_matrix(&self, b: Bidegree) -> F2Matrix {
        let target = b - Bidegree::d_shift();
        let cols = self
            .hkm_basis(b)
            .into_iter()
            .map(|m| self.hkm_coords(&self.d_right(&HKMElement { deg: b, rep: AElement::from_mono(m) })))
            .collect();
        F2Matrix::from_columns(self.hkm_space(target).dim(), cols)
    }

    /// Matrix of `d_left: KMHW_b → KMHW_{b-(2,1)}` in monomial bases.
    pub fn d_left_matrix(&self, b: Bidegree) -> Result<F2Matrix> {
        let target = b - Bidegree::d_shift();
        let s = self.kmhw_space(b);
        let mut cols = Vec::with_capacity(s.dim());
        for m in &s.monomials {
            let mut terms = BTreeSet::new();
            terms.insert(*m);
            cols.push(self.kmhw_coords(&self.d_left(&KMHWElement { deg: b, terms })?));
        }
        Ok(F2Matrix::from_columns(self.kmhw_space(target).dim(), cols))
    }

    /// Matrix of `τ ↦ τ + ρτ₀` on `HW_b` in the certificate basis.
    pub fn freeness_matrix(&self, b: Bidegree) -> Result<F2Matrix> {
        let s = self.hw_space(b);
        let mut cols = Vec::with_capacity(s.certs.len());
        for c in &s.certs {
            let base = self.cert_image(&HwCert { tpow: 0, ..*c });
            let img = self.alg.right_scale(&base, &Scalar::mono(ScalarMono { c: KmMono::ONE, tpow: c.tpow }));
            let e = self.hw_expand(&img)?;
            let ix: Vec<usize> = e.cert.iter().map(|x| s.certs.binary_search(x).expect("cert")).collect();
            cols.push(BitVec::from_ones(s.certs.len(), ix));
        }
        Ok(F2Matrix::from_columns(s.certs.len(), cols))
    }

    pub fn format_kmhw(&self, x: &KMHWElement) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.terms.iter().map(|m| self.format_kmhw_mono(m)).collect::<Vec<_>>().join(" + ")
    }

    pub fn format_kmhw_mono(&self, m: &KmHwMono) -> String {
        let mut parts = Vec::new();
        if !m.c.is_one() {
            parts.push(self.alg.preset().format_km(&m.c));
        }
        match m.e0 {
            0 => {}
            1 => parts.push("t0".into()),
            e => parts.push(format!("t0^{e}")),
        }
        let p = format_pure_bar(&m.pure);
        if p != "1" {
            parts.push(p);
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn format_cert(&self, c: &HwCert) -> String {
        let mut parts = Vec::new();
        let s = ScalarMono { c: c.c, tpow: c.tpow };
        if s != ScalarMono::ONE {
            parts.push(self.alg.format_scalar_mono(&s));
        }
        let p = format_pure_bar(&c.pure);
        if p != "1" {
            parts.push(p);
        }
        if c.eps {
            parts.push("(xb1*tau)".into());
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// Formats `τ(E)ξ(R)` with the `ξ` read as conjugates `ξ̄`.
pub fn format_pure_bar(p: &Pure) -> String {
    format_pure(p).replace('x', "xb")
}

fn xi_exps(p: &Pure) -> [u8; GEN_CAP] {
    let mut r = [0u8; GEN_CAP];
    for (i, x) in r.iter_mut().enumerate() {
        *x = p.xi_exp(i + 1);
    }
    r
}

fn homogeneous(x: &AElement) -> Result<Bidegree> {
    if x.is_zero() {
        return Ok(Bidegree::ZERO);
    }
    x.homogeneous_degree().ok_or_else(|| Error::InvalidElement("element is not homogeneous".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_data::FieldPreset;
    use alloc::vec;

    fn ctx(which: usize) -> ShadowModules {
        let p = [FieldPreset::quadratically_closed(), FieldPreset::finite_q1(), FieldPreset::finite_q3()];
        ShadowModules::new(DualSteenrod::new(p[which].clone()))
    }

    #[test]
    fn index_set_operations() {
        let i = IndexSet::new([2, 4]).unwrap();
        let j = IndexSet::new([4, 5]).unwrap();
        assert_eq!(i.union(&j), IndexSet::new([2, 4, 5]).unwrap());
        assert_eq!(i.intersection(&j), IndexSet::new([4]).unwrap());
        assert_eq!(i.sym_diff(&j), IndexSet::new([2, 5]).unwrap());
        assert_eq!(i.minus(&j), IndexSet::new([2]).unwrap());
        assert_eq!(i.disjoint_union(&j), Err(Error::IndexOverlap));
        assert!(IndexSet::new([1]).is_err());
        assert_eq!(IndexSet::all_up_to(4).len(), 8);
    }

    #[test]
    fn hw_membership_examples() {
        for w in 0..3 {
            let s = ctx(w);
            let a = s.alg();
            assert!(s.hw_expand(&AElement::one()).is_ok());
            assert_eq!(s.hw_expand(&a.xi_gen(1)), Err(Error::NotInSubalgebra));
            let g = s.xi1_bar_tau();
            let e = s.hw_expand(&g).unwrap();
            assert_eq!(e.cert.len(), 1);
            assert!(e.cert.iter().next().unwrap().eps);
        }
        // With ρ = 0 the left and right τ agree, so τ·ξ̄₁ is the generator itself.
        let s = ctx(0);
        let t = s.alg().mul(&s.alg().tau(), &s.alg().xi_bar_pow(1, 1));
        assert!(s.hw_expand(&t).unwrap().cert.iter().next().unwrap().eps);
        let s = ctx(2);
        let t = s.alg().mul(&s.alg().tau(), &s.alg().xi_bar_pow(1, 1));
        assert_eq!(s.hw_expand(&t), Err(Error::NotInSubalgebra));
    }

    #[test]
    fn hkm_examples() {
        for w in 0..3 {
            let s = ctx(w);
            let a = s.alg();
            assert!(s.to_hkm(&a.eta_r_tau_pow(1)).unwrap().is_zero());
            assert_eq!(s.to_hkm(&a.tau_gen(0)).unwrap().rep, a.tau_gen(0));
            let t2 = s.to_hkm(&a.pow(&a.tau(), 2)).unwrap();
            // τ ≡ ρτ₀ on the right, so τ² ≡ ρ²τ₀² = 0 in these presets.
            assert!(t2.is_zero());
        }
    }

    #[test]
    fn kmhw_examples() {
        for w in 0..3 {
            let s = ctx(w);
            let a = s.alg();
            assert!(s.to_kmhw(&a.tau()).unwrap().is_zero());
            let t03 = a.pow(&a.tau_gen(0), 3);
            let k = s.to_kmhw(&t03).unwrap();
            assert_eq!(s.format_kmhw(&k), "t0^3");
            let t04 = s.to_kmhw(&a.pow(&a.tau_gen(0), 4)).unwrap();
            // ρ³ = 0 in every shipped preset.
            assert!(t04.is_zero());
        }
    }

    #[test]
    fn derivation_examples() {
        for w in 0..3 {
            let s = ctx(w);
            let a = s.alg();
            let d = |x: &AElement| s.d_left(&s.to_kmhw(x).unwrap()).unwrap();
            assert_eq!(d(&a.tau_gen(1)), s.to_kmhw(&a.tau_gen(0)).unwrap());
            let xb2 = a.xi_bar_pow(2, 1);
            assert_eq!(d(&xb2), s.to_kmhw(&a.xi_bar_pow(1, 2)).unwrap());
            let sq = a.mul(&a.tau_gen(2), &a.tau_gen(1));
            let sq = a.mul(&sq, &sq);
            assert!(d(&sq).is_zero());
            let dr = |x: &AElement| s.d_right(&s.to_hkm(x).unwrap());
            assert!(dr(&a.tau_gen(0)).is_zero());
            let k = s.k_monomial(KmMono::ONE, Pure::from_parts(0b10, [0, 1, 0, 0, 0, 0]));
            let xk = a.mul(&a.xi_bar_pow(1, 1), &k);
            assert_eq!(dr(&xk), s.to_hkm(&k).unwrap());
        }
    }

    #[test]
    fn presentation_basis_examples() {
        let s = ctx(0);
        assert_eq!(s.hkw_presentation_basis(Bidegree::ZERO), vec![(KmMono::ONE, Pure::ONE)]);
        assert!(s.hkw_presentation_basis(Bidegree::new(2, 1)).is_empty());
        assert_eq!(s.hkw_presentation_basis(Bidegree::new(4, 2)), vec![(KmMono::ONE, Pure::xi(1, 2))]);
    }

    #[test]
    fn small_window_structure() {
        for w in 0..3 {
            let s = ctx(w);
            for q in -3..=3 {
                for p in -3..=10 {
                    let b = Bidegree::new(p, q);
                    let hw = s.hw_space(b);
                    assert!(hw.dependent.is_empty(), "HW certificates dependent at {b}");
                    let km = s.kmhw_space(b);
                    assert!(km.dependent.is_empty(), "KMHW monomials dependent at {b}");
                    assert_eq!(km.tau_rank + km.dim(), hw.dim(), "KMHW dimension at {b}");
                    let hk = s.hkm_space(b).dim();
                    let pres = s.hkw_presentation_basis(b).len();
                    let pres_below = s.hkw_presentation_basis(b - Bidegree::d_shift()).len();
                    assert_eq!(hk, pres + pres_below, "HKM splitting at {b}");
                    let dr = s.d_right_matrix(b);
                    assert_eq!(dr.cols() - dr.rank(), pres, "ker d_right at {b}");
                    let dr2 = s.d_right_matrix(b - Bidegree::d_shift());
                    assert!(dr2.compose(&dr).is_zero());
                    let dl = s.d_left_matrix(b).unwrap();
                    let dl2 = s.d_left_matrix(b - Bidegree::d_shift()).unwrap();
                    assert!(dl2.compose(&dl).is_zero());
                    let f = s.freeness_matrix(b).unwrap();
                    assert_eq!(f.rank(), f.cols(), "freeness at {b}");
                }
            }
        }
    }
}
