// SPDX-License-Identifier: Apache-2.0

/// A spike on its way down a synapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InFlight {
    pub synapse: usize,
    pub fire_cycle: u64,
}

/// Calendar queue of pending deliveries, one slot per cycle of the maximum
/// delay window. Slot `c % len` holds the deliveries due on cycle `c`; since
/// every delay is at most `len - 1`, a slot never mixes two cycles.
#[derive(Debug, Clone)]
pub struct DeliveryRing {
    slots: Vec<Vec<InFlight>>,
    in_flight: usize,
}

impl DeliveryRing {
    pub fn new(slots: usize) -> Self {
        assert!(slots > 0, "delivery ring needs at least one slot");
        Self {
            slots: vec![Vec::new(); slots],
            in_flight: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_flight == 0
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    pub fn clear(&mut self) {
        self.slots.iter_mut().for_each(Vec::clear);
        self.in_flight = 0;
    }

    pub fn schedule(&mut self, now: u64, delay: u32, spike: InFlight) {
        assert!(
            (delay as usize) < self.slots.len(),
            "delay {delay} does not fit a ring of {} slots",
            self.slots.len()
        );
        let slot = ((now + delay as u64) % self.slots.len() as u64) as usize;
        self.slots[slot].push(spike);
        self.in_flight += 1;
    }

    /// Removes and returns everything due on `cycle`. Hand the buffer back
    /// through [`DeliveryRing::recycle`] to keep its allocation.
    pub fn take(&mut self, cycle: u64) -> Vec<InFlight> {
        let slot = (cycle % self.slots.len() as u64) as usize;
        let due = std::mem::take(&mut self.slots[slot]);
        self.in_flight -= due.len();
        due
    }

    pub fn recycle(&mut self, cycle: u64, mut buf: Vec<InFlight>) {
        let slot = (cycle % self.slots.len() as u64) as usize;
        if self.slots[slot].is_empty() {
            buf.clear();
            self.slots[slot] = buf;
        }
    }
}
