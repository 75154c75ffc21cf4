use super::{entropy, marginal_table, JointLaw};
use crate::error::{Error, Result};

/// Agreement required between the two directed-information routes.
const ROUTE_TOL: f64 = 1e-9;

/// Both evaluations of `I(X^N -> Y^N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedRoutes {
    /// `sum_n I(X^n; Y_n | Y^{n-1})` from conditional-probability ratios.
    pub conditional_mi_sum: f64,
    /// `H(Y^N) - sum_n H(Y_n | X^n, Y^{n-1})` from marginal entropies.
    pub entropy_form: f64,
}

struct Blocks {
    n: usize,
    xs: usize,
    ys: usize,
}

fn blocks(joint: &JointLaw, n: usize) -> Result<Blocks> {
    let dims = joint.dims();
    if n == 0 || dims.len() != 2 * n {
        return Err(Error::Dimension(format!(
            "joint with {} axes cannot be split into two blocks of length {n}",
            dims.len()
        )));
    }
    let (xs, ys) = (dims[0], dims[n]);
    if dims[..n].iter().any(|&d| d != xs) || dims[n..].iter().any(|&d| d != ys) {
        return Err(Error::Dimension(format!("mixed alphabet sizes in {dims:?}")));
    }
    Ok(Blocks { n, xs, ys })
}

/// Marginal over `x^a` and `y^b`, laid out `x_1..x_a, y_1..y_b`.
fn prefix_marginal(joint: &JointLaw, b: &Blocks, a: usize, c: usize) -> Vec<f64> {
    let axes: Vec<usize> = (0..a).chain(b.n..b.n + c).collect();
    marginal_table(joint.dims(), joint.table(), &axes)
}

fn routes(joint: &JointLaw, b: &Blocks) -> DirectedRoutes {
    let mut mi_sum = 0.0;
    let mut cond_entropy_sum = 0.0;
    for k in 1..=b.n {
        let xy = prefix_marginal(joint, b, k, k);
        let x_ypast = prefix_marginal(joint, b, k, k - 1);
        let y = prefix_marginal(joint, b, 0, k);
        let y_past = prefix_marginal(joint, b, 0, k - 1);
        let y_block = b.ys.pow(k as u32);
        for (idx, &p) in xy.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let (xi, yi) = (idx / y_block, idx % y_block);
            let num = p * y_past[yi / b.ys];
            let den = x_ypast[xi * (y_block / b.ys) + yi / b.ys] * y[yi];
            mi_sum += p * (num / den).log2();
        }
        cond_entropy_sum += entropy(&xy) - entropy(&x_ypast);
    }
    let h_y = entropy(&prefix_marginal(joint, b, 0, b.n));
    DirectedRoutes {
        conditional_mi_sum: mi_sum,
        entropy_form: h_y - cond_entropy_sum,
    }
}

/// Both routes, without the agreement check.
pub fn directed_information_routes(joint: &JointLaw, n: usize) -> Result<DirectedRoutes> {
    let b = blocks(joint, n)?;
    Ok(routes(joint, &b))
}

/// `I(X^N -> Y^N)` in bits for a joint law on axes `x_1..x_N, y_1..y_N`.
///
/// Computed as the conditional mutual-information sum and cross-checked
/// against the entropy-difference form.
pub fn directed_information(joint: &JointLaw, n: usize) -> Result<f64> {
    let r = directed_information_routes(joint, n)?;
    if (r.conditional_mi_sum - r.entropy_form).abs() > ROUTE_TOL {
        return Err(Error::Contract(format!(
            "directed information routes disagree: {} vs {}",
            r.conditional_mi_sum, r.entropy_form
        )));
    }
    Ok(r.conditional_mi_sum.max(0.0))
}

/// Outcome of comparing directed information with the single-letter sum on a memoryless channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleLetterCheck {
    pub directed: f64,
    pub sum_single: f64,
    pub outputs_independent: bool,
}

impl SingleLetterCheck {
    pub fn bound_holds(&self) -> bool {
        self.directed <= self.sum_single + ROUTE_TOL
    }

    pub fn equality_holds(&self) -> bool {
        (self.directed - self.sum_single).abs() <= ROUTE_TOL
    }
}

/// Compares `I(X^N -> Y^N)` with `sum_n I(X_n; Y_n)` for a joint generated by a memoryless channel.
///
/// Fails with a contract violation when some `p(y_n | x^n, y^{n-1})` depends
/// on more than `x_n`.
pub fn single_letter_bound_check(joint: &JointLaw, n: usize) -> Result<SingleLetterCheck> {
    let b = blocks(joint, n)?;
    let (xs, ys) = (b.xs, b.ys);
    let mut sum_single = 0.0;
    for k in 1..=n {
        let pair = marginal_table(joint.dims(), joint.table(), &[k - 1, n + k - 1]);
        let px: Vec<f64> = pair.chunks(ys).map(|r| r.iter().sum()).collect();
        let mut py = vec![0.0; ys];
        for row in pair.chunks(ys) {
            for (a, v) in py.iter_mut().zip(row) {
                *a += v;
            }
        }
        sum_single += entropy(&px) + entropy(&py) - entropy(&pair);

        // p(x^k, y^k) must equal p(x^k, y^{k-1}) W(y_k | x_k) with W read off the pair marginal.
        let xy = prefix_marginal(joint, &b, k, k);
        let x_ypast = prefix_marginal(joint, &b, k, k - 1);
        let y_block = ys.pow(k as u32);
        for (idx, &p) in xy.iter().enumerate() {
            let (xi, yi) = (idx / y_block, idx % y_block);
            let (x_k, y_k) = (xi % xs, yi % ys);
            let w = if px[x_k] > 0.0 { pair[x_k * ys + y_k] / px[x_k] } else { 0.0 };
            let predicted = x_ypast[xi * (y_block / ys) + yi / ys] * w;
            if (p - predicted).abs() > ROUTE_TOL {
                return Err(Error::Contract(format!(
                    "step {k}: output depends on more than the current input (mass {p} vs {predicted})"
                )));
            }
        }
    }
    let y_joint = prefix_marginal(joint, &b, 0, n);
    let singles: Vec<Vec<f64>> = (0..n)
        .map(|k| marginal_table(joint.dims(), joint.table(), &[n + k]))
        .collect();
    let outputs_independent = y_joint.iter().enumerate().all(|(idx, &p)| {
        let mut rest = idx;
        let mut prod = 1.0;
        for k in (0..n).rev() {
            prod *= singles[k][rest % ys];
            rest /= ys;
        }
        (p - prod).abs() <= ROUTE_TOL
    });
    Ok(SingleLetterCheck {
        directed: directed_information(joint, n)?,
        sum_single,
        outputs_independent,
    })
}
