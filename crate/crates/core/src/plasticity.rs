// SPDX-License-Identifier: Apache-2.0

//! Table-driven STDP arithmetic.
//!
//! One table of size `T` serves both directions. Indices `0..=T/2` are the
//! potentiation region, read backwards from the centre as the gap between
//! the last delivery and the threshold crossing grows. Indices above `T/2`
//! are the depression region, read forwards as deliveries keep arriving after
//! the neuron's last crossing.

use crate::netmodel::signed_range;

/// Table index for a neuron that crossed threshold at the end of cycle
/// `exceed_cycle`, for a pre-synapse that last delivered on `delivery_cycle`.
///
/// Only non-negative results select an entry.
pub fn potentiation_index(table_len: usize, exceed_cycle: u64, delivery_cycle: u64) -> i64 {
    debug_assert!(exceed_cycle >= delivery_cycle);
    (table_len / 2) as i64 - (exceed_cycle as i64 - delivery_cycle as i64)
}

/// Table index for a delivery on `cycle` into a neuron that did not cross
/// threshold, where `last_exceed_cycle` is the end of the cycle on which it
/// last did.
///
/// Only results below the table length select an entry.
pub fn depression_index(table_len: usize, cycle: u64, last_exceed_cycle: u64) -> i64 {
    debug_assert!(cycle > last_exceed_cycle);
    (table_len / 2) as i64 + (cycle as i64 - last_exceed_cycle as i64)
}

/// `weight + delta`, saturated to the signed `weight_bits` range.
pub fn apply_weight_delta(weight: i64, delta: i64, weight_bits: u32) -> i64 {
    let (lo, hi) = signed_range(weight_bits);
    weight.saturating_add(delta).clamp(lo, hi)
}

/// A hardware STDP table.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StdpTable {
    values: Vec<i64>,
}

impl StdpTable {
    pub fn new(values: Vec<i64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Last index of the potentiation region.
    pub fn centre(&self) -> usize {
        self.values.len() / 2
    }

    /// Weight change for a crossing at the end of `exceed_cycle` when the
    /// synapse last delivered on `delivery_cycle`.
    pub fn potentiation(&self, exceed_cycle: u64, delivery_cycle: u64) -> Option<i64> {
        if self.is_empty() {
            return None;
        }
        let i = potentiation_index(self.len(), exceed_cycle, delivery_cycle);
        usize::try_from(i).ok().map(|i| self.values[i])
    }

    /// Weight change for a sub-threshold delivery after a crossing.
    pub fn depression(&self, cycle: u64, last_exceed_cycle: u64) -> Option<i64> {
        if self.is_empty() {
            return None;
        }
        let i = depression_index(self.len(), cycle, last_exceed_cycle);
        usize::try_from(i)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }
}
