//! Arithmetic operation counting.
//!
//! Estimator code paths are generic over [`Tally`]. Production calls pass
//! [`NoTally`], which compiles away; [`OpCounter`] records counts per named
//! stage so that growth with problem size can be checked stage by stage.

use std::collections::BTreeMap;
use std::ops::AddAssign;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub add: u64,
    pub mul: u64,
    pub cmp: u64,
    pub transcendental: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.add + self.mul + self.cmp + self.transcendental
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.add += rhs.add;
        self.mul += rhs.mul;
        self.cmp += rhs.cmp;
        self.transcendental += rhs.transcendental;
    }
}

pub trait Tally {
    fn add(&mut self, n: u64);
    fn mul(&mut self, n: u64);
    fn cmp(&mut self, n: u64);
    fn transcendental(&mut self, n: u64);
    /// Attribute subsequent counts to `name`.
    fn stage(&mut self, name: &'static str);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn add(&mut self, _: u64) {}
    #[inline(always)]
    fn mul(&mut self, _: u64) {}
    #[inline(always)]
    fn cmp(&mut self, _: u64) {}
    #[inline(always)]
    fn transcendental(&mut self, _: u64) {}
    #[inline(always)]
    fn stage(&mut self, _: &'static str) {}
}

#[derive(Debug, Clone)]
pub struct OpCounter {
    current: &'static str,
    stages: BTreeMap<&'static str, OpCounts>,
}

impl Default for OpCounter {
    fn default() -> Self {
        OpCounter {
            current: "main",
            stages: BTreeMap::new(),
        }
    }
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> OpCounts {
        let mut sum = OpCounts::default();
        for c in self.stages.values() {
            sum += *c;
        }
        sum
    }

    pub fn stage_counts(&self, name: &str) -> OpCounts {
        self.stages.get(name).copied().unwrap_or_default()
    }

    pub fn stages(&self) -> impl Iterator<Item = (&'static str, OpCounts)> + '_ {
        self.stages.iter().map(|(k, v)| (*k, *v))
    }

    fn slot(&mut self) -> &mut OpCounts {
        self.stages.entry(self.current).or_default()
    }
}

impl Tally for OpCounter {
    fn add(&mut self, n: u64) {
        self.slot().add += n;
    }
    fn mul(&mut self, n: u64) {
        self.slot().mul += n;
    }
    fn cmp(&mut self, n: u64) {
        self.slot().cmp += n;
    }
    fn transcendental(&mut self, n: u64) {
        self.slot().transcendental += n;
    }
    fn stage(&mut self, name: &'static str) {
        self.current = name;
    }
}
