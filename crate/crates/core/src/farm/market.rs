// SPDX-License-Identifier: Apache-2.0

//! Constant-elasticity demand model for the weekly market.
//!
//! `units = min(stock, round(base_demand * (reference / price)^elasticity))`
//!
//! Revenue-maximizing prices are found without scanning the price grid: for
//! every possible sales volume `k` the best price is the largest integer price
//! that still sells at least `k` units, so only those breakpoints need to be
//! compared.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandCurve {
    pub base_demand: u32,
    pub reference_price: u32,
    pub elasticity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSuggestion {
    pub price: u32,
    pub units: u32,
    pub revenue: u64,
}

impl DemandCurve {
    /// Units demanded at `price` before the stock clamp.
    pub fn demanded(&self, price: u32) -> u32 {
        debug_assert!(price > 0);
        let ratio = self.reference_price as f64 / price as f64;
        (self.base_demand as f64 * ratio.powf(self.elasticity)).round() as u32
    }

    pub fn units_sold(&self, stock: u32, price: u32) -> u32 {
        stock.min(self.demanded(price))
    }

    pub fn revenue(&self, stock: u32, price: u32) -> u64 {
        self.units_sold(stock, price) as u64 * price as u64
    }

    /// Best integer price in `1..=max_price`; ties go to the lowest price.
    /// With nothing to sell the reference price is returned.
    pub fn best_price(&self, stock: u32, max_price: u32) -> PriceSuggestion {
        let max_price = max_price.max(1);
        if stock == 0 || self.base_demand == 0 {
            let price = self.reference_price.clamp(1, max_price);
            return PriceSuggestion {
                price,
                units: 0,
                revenue: 0,
            };
        }

        let mut candidates: Vec<u32> = vec![max_price];
        for k in 1..=stock {
            if let Some(p) = self.max_price_selling(k, max_price) {
                candidates.push(p);
            }
        }
        candidates.sort_unstable();
        candidates.dedup();

        let mut best = PriceSuggestion {
            price: self.reference_price.clamp(1, max_price),
            units: 0,
            revenue: 0,
        };
        let mut found = false;
        for price in candidates {
            let revenue = self.revenue(stock, price);
            if !found || revenue > best.revenue {
                found = true;
                best = PriceSuggestion {
                    price,
                    units: self.units_sold(stock, price),
                    revenue,
                };
            }
        }
        best
    }

    /// Largest integer price `<= max_price` at which at least `k` units are
    /// demanded, if any.
    fn max_price_selling(&self, k: u32, max_price: u32) -> Option<u32> {
        // round(x) >= k  <=>  x >= k - 0.5
        let target = k as f64 - 0.5;
        let approx = if self.elasticity == 0.0 {
            if self.base_demand as f64 >= target {
                max_price as f64
            } else {
                0.0
            }
        } else {
            self.reference_price as f64 * (self.base_demand as f64 / target).powf(1.0 / self.elasticity)
        };
        let mut p = approx.floor().clamp(0.0, max_price as f64) as u32;
        // Correct for floating error around the breakpoint.
        while p < max_price && self.demanded(p + 1) >= k {
            p += 1;
        }
        while p >= 1 && self.demanded(p) < k {
            p -= 1;
        }
        (p >= 1).then_some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(e: f64) -> DemandCurve {
        DemandCurve {
            base_demand: 10,
            reference_price: 8,
            elasticity: e,
        }
    }

    #[test]
    fn reference_price_is_fixed_point() {
        let c = curve(1.0);
        assert_eq!(c.units_sold(50, 8), 10);
        assert_eq!(c.units_sold(4, 8), 4);
    }

    #[test]
    fn doubling_price_halves_demand() {
        let c = curve(1.0);
        assert_eq!(c.demanded(16), 5);
        assert_eq!(c.demanded(8), 10);
    }

    #[test]
    fn best_price_on_small_case() {
        let c = curve(1.0);
        let brute = (1..=40u32)
            .map(|p| (c.revenue(3, p), p))
            .fold((0u64, 0u32), |acc, x| if x.0 > acc.0 { x } else { acc });
        let s = c.best_price(3, 40);
        assert_eq!((s.revenue, s.price), brute);
    }

    #[test]
    fn empty_stock_returns_reference() {
        let s = curve(1.5).best_price(0, 30);
        assert_eq!(s, PriceSuggestion { price: 8, units: 0, revenue: 0 });
    }
}
