//! Step-bounded halting oracles, the dyadic double sequence they induce, and
//! the threshold stopper.
//!
//! A [`StepBoundedOracle`] answers "has the program halted on input `n` within
//! `m` steps?". From it,
//!
//! ```text
//! lambda(n, m) = 2^-l   if the program halts on n after l <= m steps
//!                2^-m   otherwise
//! ```
//!
//! which is non-increasing in `m` and satisfies
//! `|lambda(n, m) - lambda(n, M)| < 2^-M` for all `m >= M`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};

pub trait StepBoundedOracle {
    /// Whether the program halts on `n` within `m` steps. Must be monotone in `m`.
    fn halted_within(&mut self, n: u64, m: u64) -> Result<bool>;

    /// First step budget `l` in `1..=budget` with `halted_within(n, l)`.
    fn halting_step(&mut self, n: u64, budget: u64) -> Result<Option<u64>> {
        for l in 1..=budget {
            if self.halted_within(n, l)? {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }
}

/// Halting times listed per input; unlisted inputs use `default`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixedHaltingTimes {
    pub times: BTreeMap<u64, Option<u64>>,
    pub default: Option<u64>,
}

impl FixedHaltingTimes {
    /// Every input halts after exactly `l` steps.
    pub fn uniform(l: u64) -> Self {
        FixedHaltingTimes {
            times: BTreeMap::new(),
            default: Some(l),
        }
    }

    fn time(&self, n: u64) -> Option<u64> {
        self.times.get(&n).copied().unwrap_or(self.default)
    }
}

impl StepBoundedOracle for FixedHaltingTimes {
    fn halted_within(&mut self, n: u64, m: u64) -> Result<bool> {
        Ok(self.time(n).is_some_and(|l| l <= m))
    }

    fn halting_step(&mut self, n: u64, budget: u64) -> Result<Option<u64>> {
        Ok(self.time(n).map(|l| l.max(1)).filter(|&l| l <= budget))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NeverHalts;

impl StepBoundedOracle for NeverHalts {
    fn halted_within(&mut self, _n: u64, _m: u64) -> Result<bool> {
        Ok(false)
    }

    fn halting_step(&mut self, _n: u64, _budget: u64) -> Result<Option<u64>> {
        Ok(None)
    }
}

/// Counter-machine instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    Inc(usize),
    /// Decrement, saturating at zero.
    Dec(usize),
    /// Jump to the target when the register is zero.
    Jz(usize, usize),
    Jmp(usize),
    Halt,
}

const MAX_REGISTERS: usize = 64;

/// Minimal register machine. The input goes in `r0`, all other registers
/// start at zero, and each executed instruction is one step. Running off the
/// end of the program halts without spending a step.
///
/// Text format, one instruction per line; `#` starts a comment and `name:`
/// defines a label (optionally followed by an instruction on the same line):
///
/// ```text
/// # halts after 3n + 2 steps
/// loop: jz r0 done
///       dec r0
///       jmp loop
/// done: halt
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterMachine {
    program: Vec<Instr>,
    registers: usize,
    /// Halting step (or `None` if still running) keyed by input, with the budget it was explored to.
    cache: HashMap<u64, (u64, Option<u64>)>,
}

fn parse_register(tok: &str, line: usize) -> Result<usize> {
    let idx = tok
        .strip_prefix('r')
        .and_then(|d| d.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse(format!("line {line}: expected a register like r0, got `{tok}`")))?;
    if idx >= MAX_REGISTERS {
        return Err(Error::Parse(format!("line {line}: register r{idx} exceeds r{}", MAX_REGISTERS - 1)));
    }
    Ok(idx)
}

impl FromStr for CounterMachine {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut labels = HashMap::new();
        let mut raw: Vec<(usize, Vec<&str>)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let mut rest = line.split('#').next().unwrap_or("").trim();
            if let Some((label, tail)) = rest.split_once(':') {
                let label = label.trim();
                if label.is_empty() || label.contains(char::is_whitespace) {
                    return Err(Error::Parse(format!("line {}: bad label `{label}`", i + 1)));
                }
                if labels.insert(label.to_string(), raw.len()).is_some() {
                    return Err(Error::Parse(format!("line {}: duplicate label `{label}`", i + 1)));
                }
                rest = tail.trim();
            }
            if !rest.is_empty() {
                raw.push((i + 1, rest.split_whitespace().collect()));
            }
        }
        let target = |name: &str, line: usize| {
            labels
                .get(name)
                .copied()
                .ok_or_else(|| Error::Parse(format!("line {line}: unknown label `{name}`")))
        };
        let mut program = Vec::with_capacity(raw.len());
        let mut registers = 1;
        for (line, toks) in raw {
            let instr = match toks.as_slice() {
                ["inc", r] => Instr::Inc(parse_register(r, line)?),
                ["dec", r] => Instr::Dec(parse_register(r, line)?),
                ["jz", r, l] => Instr::Jz(parse_register(r, line)?, target(l, line)?),
                ["jmp", l] => Instr::Jmp(target(l, line)?),
                ["halt"] => Instr::Halt,
                _ => return Err(Error::Parse(format!("line {line}: cannot parse `{}`", toks.join(" ")))),
            };
            if let Instr::Inc(r) | Instr::Dec(r) | Instr::Jz(r, _) = instr {
                registers = registers.max(r + 1);
            }
            program.push(instr);
        }
        Ok(CounterMachine {
            program,
            registers,
            cache: HashMap::new(),
        })
    }
}

impl CounterMachine {
    pub fn program(&self) -> &[Instr] {
        &self.program
    }

    /// Steps until halting on `n`, or `None` if still running after `budget` steps.
    pub fn run(&self, n: u64, budget: u64) -> Option<u64> {
        let mut regs = vec![0u64; self.registers];
        regs[0] = n;
        let mut pc = 0;
        let mut steps = 0;
        while pc < self.program.len() {
            if steps == budget {
                return None;
            }
            steps += 1;
            pc = match self.program[pc] {
                Instr::Inc(r) => {
                    regs[r] = regs[r].saturating_add(1);
                    pc + 1
                }
                Instr::Dec(r) => {
                    regs[r] = regs[r].saturating_sub(1);
                    pc + 1
                }
                Instr::Jz(r, t) if regs[r] == 0 => t,
                Instr::Jz(..) => pc + 1,
                Instr::Jmp(t) => t,
                Instr::Halt => return Some(steps),
            };
        }
        Some(steps)
    }

    fn cached_run(&mut self, n: u64, budget: u64) -> Option<u64> {
        if let Some(&(explored, result)) = self.cache.get(&n) {
            match result {
                Some(l) => return (l <= budget).then_some(l),
                None if budget <= explored => return None,
                None => {}
            }
        }
        let result = self.run(n, budget);
        self.cache.insert(n, (budget, result));
        result
    }
}

impl StepBoundedOracle for CounterMachine {
    fn halted_within(&mut self, n: u64, m: u64) -> Result<bool> {
        Ok(self.cached_run(n, m).is_some())
    }

    fn halting_step(&mut self, n: u64, budget: u64) -> Result<Option<u64>> {
        Ok(self.cached_run(n, budget).map(|l| l.max(1)))
    }
}

/// The dyadic rational `2^-exponent`, ordered by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    pub exponent: u64,
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.exponent.cmp(&self.exponent)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Dyadic {
    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.exponent)
    }

    pub fn to_f64(self) -> f64 {
        (-(self.exponent as f64)).exp2()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", BigInt::one() << self.exponent)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `lambda(n, m)` for the given oracle.
pub fn lambda_double_sequence(oracle: &mut dyn StepBoundedOracle, n: u64, m: u64) -> Result<Dyadic> {
    if n == 0 || m == 0 {
        return Err(Error::Domain(format!("lambda(n, m) needs n, m >= 1 (got n={n}, m={m})")));
    }
    let l = oracle.halting_step(n, m)?;
    Ok(Dyadic {
        exponent: l.unwrap_or(m),
    })
}

/// `lambda(n, 1..=m_max)`.
pub fn lambda_row(oracle: &mut dyn StepBoundedOracle, n: u64, m_max: u64) -> Result<Vec<Dyadic>> {
    (1..=m_max).map(|m| lambda_double_sequence(oracle, n, m)).collect()
}

/// First violation of monotonicity or of the `2^-M` convergence bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateViolation {
    /// 1-based indices `(M, m)` with `m >= M`.
    pub big_m: u64,
    pub m: u64,
    pub kind: &'static str,
}

/// Checks a row `lambda(n, 1..)`: non-increasing, and
/// `|lambda(n, m) - lambda(n, M)| < 2^-M` for every `m >= M`. Exact arithmetic.
pub fn check_certificate(row: &[Dyadic]) -> std::result::Result<(), CertificateViolation> {
    let values: Vec<BigRational> = row.iter().map(|d| d.to_rational()).collect();
    for (i, w) in values.windows(2).enumerate() {
        if w[1] > w[0] {
            return Err(CertificateViolation {
                big_m: i as u64 + 1,
                m: i as u64 + 2,
                kind: "increase",
            });
        }
    }
    for (big, vb) in values.iter().enumerate() {
        let bound = Dyadic {
            exponent: big as u64 + 1,
        }
        .to_rational();
        for (m, vm) in values.iter().enumerate().skip(big) {
            if (vm - vb).abs() >= bound {
                return Err(CertificateViolation {
                    big_m: big as u64 + 1,
                    m: m as u64 + 1,
                    kind: "bound",
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StopOutcome {
    Halted { step: u64 },
    Exhausted { budget: u64 },
}

/// Scans `m = 1, 2, ..` and stops at the first `nu(m) > 2^-m`.
///
/// If `|mu - nu(m)| < 2^-m` then this stops exactly when `mu > 0`; the budget
/// turns the non-stopping case into [`StopOutcome::Exhausted`].
pub fn threshold_stopper(mut nu: impl FnMut(u64) -> Result<f64>, budget: u64) -> Result<StopOutcome> {
    for m in 1..=budget {
        let v = nu(m)?;
        if v > (-(m as f64)).exp2() {
            return Ok(StopOutcome::Halted { step: m });
        }
    }
    Ok(StopOutcome::Exhausted { budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn halting_at_three() {
        let mut o = FixedHaltingTimes::uniform(3);
        assert_eq!(lambda_double_sequence(&mut o, 1, 5).unwrap().to_rational(), BigRational::new(1.into(), 8.into()));
        let row: Vec<String> = lambda_row(&mut o, 1, 5).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(row, ["1/2", "1/4", "1/8", "1/8", "1/8"]);
    }

    #[test]
    fn never_halting_row() {
        let row = lambda_row(&mut NeverHalts, 4, 10).unwrap();
        assert!(row.iter().zip(1..).all(|(d, m)| d.exponent == m));
        assert!(check_certificate(&row).is_ok());
        assert!(lambda_double_sequence(&mut NeverHalts, 0, 3).is_err());
        assert!(lambda_double_sequence(&mut NeverHalts, 1, 0).is_err());
    }

    #[test]
    fn dyadics_order_by_value() {
        assert!(Dyadic { exponent: 3 } < Dyadic { exponent: 1 });
    }

    #[test]
    fn certificate_rejects_bad_rows() {
        let up = [Dyadic { exponent: 2 }, Dyadic { exponent: 1 }];
        assert_eq!(check_certificate(&up).unwrap_err().kind, "increase");
        let jump = [Dyadic { exponent: 1 }, Dyadic { exponent: 1 }, Dyadic { exponent: 5 }];
        assert_eq!(check_certificate(&jump).unwrap_err().kind, "bound");
    }

    #[test]
    fn counter_machine_programs() {
        let countdown: CounterMachine = "loop: jz r0 done\n dec r0\n jmp loop\ndone: halt\n".parse().unwrap();
        assert_eq!(countdown.run(0, 100), Some(2));
        assert_eq!(countdown.run(3, 100), Some(11));
        assert_eq!(countdown.run(3, 10), None);
        let spin: CounterMachine = "top: jmp top # forever".parse().unwrap();
        assert_eq!(spin.run(1, 1000), None);
        let empty: CounterMachine = "# nothing\n".parse().unwrap();
        assert_eq!(empty.run(5, 1), Some(0));
        let mut e = empty;
        assert_eq!(lambda_double_sequence(&mut e, 1, 4).unwrap().exponent, 1);
    }

    #[test]
    fn counter_machine_parse_errors() {
        assert!("jmp nowhere".parse::<CounterMachine>().is_err());
        assert!("inc x1".parse::<CounterMachine>().is_err());
        assert!("a: halt\na: halt".parse::<CounterMachine>().is_err());
        assert!("mul r1 r2".parse::<CounterMachine>().is_err());
        assert!("inc r64".parse::<CounterMachine>().is_err());
    }

    #[test]
    fn cache_answers_match_fresh_runs() {
        let mut m: CounterMachine = "loop: jz r0 done\n dec r0\n jmp loop\ndone: halt\n".parse().unwrap();
        let fresh = m.clone();
        for (n, budget) in [(3, 5), (3, 20), (3, 4), (2, 20), (2, 3)] {
            assert_eq!(m.halted_within(n, budget).unwrap(), fresh.run(n, budget).is_some());
        }
    }

    #[test]
    fn stopper_examples() {
        assert_eq!(threshold_stopper(|_| Ok(1.0), 10).unwrap(), StopOutcome::Halted { step: 1 });
        let never = threshold_stopper(|m| Ok((-(m as f64) - 1.0).exp2()), 64).unwrap();
        assert_eq!(never, StopOutcome::Exhausted { budget: 64 });
        assert_eq!(threshold_stopper(|_| Ok(0.4417), 64).unwrap(), StopOutcome::Halted { step: 2 });
    }

    proptest! {
        #[test]
        fn rows_carry_certificates(halt in proptest::option::of(1u64..40), m_max in 1u64..=20) {
            let mut o = FixedHaltingTimes { times: BTreeMap::new(), default: halt };
            let row = lambda_row(&mut o, 1, m_max).unwrap();
            prop_assert!(check_certificate(&row).is_ok());
            prop_assert!(row.iter().all(|d| d.exponent >= 1));
        }

        #[test]
        fn stopper_halts_exactly_on_positive_limits(
            mu_exp in proptest::option::of(0u32..12),
            noise in proptest::collection::vec(-0.999f64..0.999, 64),
        ) {
            // mu = 2^-mu_exp or 0; nu(m) = mu + noise_m 2^-m stays within 2^-m of mu.
            let mu = mu_exp.map_or(0.0, |e| (-(e as f64)).exp2());
            let out = threshold_stopper(|m| Ok(mu + noise[m as usize - 1] * (-(m as f64)).exp2()), 64).unwrap();
            match out {
                StopOutcome::Halted { .. } => prop_assert!(mu > 0.0),
                StopOutcome::Exhausted { .. } => prop_assert!(mu == 0.0),
            }
        }
    }
}
