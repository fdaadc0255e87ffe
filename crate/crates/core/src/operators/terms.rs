//! Term-by-term assembly of vector-valued bilinear forms.
//!
//! A form is a list of [`Term`]s, each contributing to one `(test, trial)`
//! component block with a single derivative pattern and a coefficient that is a
//! product of geometric factors. Every term is assembled by its own sweep over
//! all faces, so the assembly cost grows with the number of terms in the form.

use super::block::BlockOperator3;
use super::Discretization;

/// Which derivatives of the test (`a`) and trial (`b`) basis functions appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    /// `d_k phi_a d_l phi_b`.
    Second { test: usize, trial: usize },
    /// `d_k phi_a phi_b`, with `phi_b` at the centroid.
    FirstTest(usize),
    /// `phi_a d_l phi_b`, with `phi_a` at the centroid.
    FirstTrial(usize),
    /// `phi_a phi_b`, both at the centroid.
    Zero,
}

/// Per-face geometric quantity used in term coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// Component `k` of the interpolated normal at the centroid.
    Normal(usize),
    /// `d_k nu_l` of the interpolated normal.
    NormalGradient(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub test_component: usize,
    pub trial_component: usize,
    pub kind: TermKind,
    pub scale: f64,
    pub factors: Vec<Factor>,
}

/// Static term counts of an assembled form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TermAudit {
    pub second_order: usize,
    pub first_order: usize,
    pub zero_order: usize,
    /// Terms per `(test, trial)` block.
    pub per_block: [[usize; 3]; 3],
    /// Face-level products evaluated (terms times faces times 9 local entries).
    pub local_products: usize,
}

impl TermAudit {
    pub fn total(&self) -> usize {
        self.second_order + self.first_order + self.zero_order
    }

    fn of(terms: &[Term], faces: usize) -> Self {
        let mut audit = Self::default();
        for t in terms {
            match t.kind {
                TermKind::Second { .. } => audit.second_order += 1,
                TermKind::FirstTest(_) | TermKind::FirstTrial(_) => audit.first_order += 1,
                TermKind::Zero => audit.zero_order += 1,
            }
            audit.per_block[t.test_component][t.trial_component] += 1;
        }
        audit.local_products = terms.len() * faces * 9;
        audit
    }
}

/// Levi-Civita pairs `(k, l, sign)` with `eps_{i k l} != 0`.
pub(crate) fn levi_civita(i: usize) -> [(usize, usize, f64); 2] {
    let (k, l) = ((i + 1) % 3, (i + 2) % 3);
    [(k, l, 1.0), (l, k, -1.0)]
}

/// `b(w, u) = int Div w Div u`: block `(i, j)` is `d_i phi_a d_j phi_b`.
pub fn graddiv_terms() -> Vec<Term> {
    let mut terms = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            terms.push(Term {
                test_component: i,
                trial_component: j,
                kind: TermKind::Second { test: i, trial: j },
                scale: 1.0,
                factors: vec![],
            });
        }
    }
    terms
}

/// `r(v, u) = int Rot v Rot u` with `Rot v = nu . curl v - v . curl nu`.
///
/// Expanding both curl factors gives, per block, four second-order, eight
/// first-order and four zero-order terms.
pub fn rotrot_terms() -> Vec<Term> {
    let mut terms = Vec::with_capacity(144);
    for i in 0..3 {
        for j in 0..3 {
            let block = |kind, scale, factors| Term {
                test_component: i,
                trial_component: j,
                kind,
                scale,
                factors,
            };
            // (nu x grad phi_a)_i = eps_{i k l} nu_k d_l phi_a
            // (curl nu)_i        = eps_{i k l} d_k nu_l
            for (k1, l1, s1) in levi_civita(i) {
                for (k2, l2, s2) in levi_civita(j) {
                    terms.push(block(
                        TermKind::Second {
                            test: l1,
                            trial: l2,
                        },
                        s1 * s2,
                        vec![Factor::Normal(k1), Factor::Normal(k2)],
                    ));
                }
            }
            for (k1, l1, s1) in levi_civita(i) {
                for (k2, l2, s2) in levi_civita(j) {
                    terms.push(block(
                        TermKind::FirstTest(l1),
                        -s1 * s2,
                        vec![Factor::Normal(k1), Factor::NormalGradient(k2, l2)],
                    ));
                    terms.push(block(
                        TermKind::FirstTrial(l2),
                        -s1 * s2,
                        vec![Factor::NormalGradient(k1, l1), Factor::Normal(k2)],
                    ));
                }
            }
            for (k1, l1, s1) in levi_civita(i) {
                for (k2, l2, s2) in levi_civita(j) {
                    terms.push(block(
                        TermKind::Zero,
                        s1 * s2,
                        vec![
                            Factor::NormalGradient(k1, l1),
                            Factor::NormalGradient(k2, l2),
                        ],
                    ));
                }
            }
        }
    }
    terms
}

/// Assembles `terms` one sweep per term.
pub fn assemble_terms(disc: &Discretization, terms: &[Term]) -> (BlockOperator3, TermAudit) {
    let mut op = BlockOperator3::zeros(disc.pattern());
    for term in terms {
        let block = op.block_mut(term.test_component, term.trial_component);
        let values = block.values_mut();
        for (face, slots) in disc.faces().iter().zip(disc.face_slots()) {
            let mut c = term.scale * face.area;
            for f in &term.factors {
                c *= match *f {
                    Factor::Normal(k) => face.centroid_normal[k],
                    Factor::NormalGradient(k, l) => face.normal_gradient[(k, l)],
                };
            }
            let g = &face.gradients;
            for a in 0..3 {
                for b in 0..3 {
                    let local = match term.kind {
                        TermKind::Second { test, trial } => g[a][test] * g[b][trial],
                        TermKind::FirstTest(k) => g[a][k] / 3.0,
                        TermKind::FirstTrial(l) => g[b][l] / 3.0,
                        TermKind::Zero => 1.0 / 9.0,
                    };
                    values[slots[3 * a + b]] += c * local;
                }
            }
        }
    }
    let audit = TermAudit::of(terms, disc.faces().len());
    (op, audit)
}
