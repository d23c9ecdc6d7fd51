/// Deterministic work budget for a single tactic call.
#[derive(Debug, Clone)]
pub struct Fuel {
    remaining: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfFuel;

impl Fuel {
    pub fn new(amount: usize) -> Fuel {
        Fuel { remaining: amount }
    }

    pub fn burn(&mut self, amount: usize) -> Result<(), OutOfFuel> {
        if amount > self.remaining {
            self.remaining = 0;
            Err(OutOfFuel)
        } else {
            self.remaining -= amount;
            Ok(())
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }
}
