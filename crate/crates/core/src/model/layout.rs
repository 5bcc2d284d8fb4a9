use serde::{Deserialize, Serialize};

use super::ModelError;

/// Decision variables of one hour, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// TG output
    G,
    /// electricity sold (negative: bought)
    GridTrade,
    /// RECs sold
    RecTrade,
    /// CERs sold
    CerTrade,
    Charge,
    Discharge,
    Soc,
    /// REC withdraw minus deposit
    RecNet,
    RecLevel,
    /// RECs retired for the portfolio standard
    RecRetired,
    /// CER withdraw minus deposit
    CerNet,
    CerLevel,
    /// CERs drawn from the quota
    CerQuota,
}

impl Role {
    pub const COUNT: usize = 13;
    pub const ALL: [Role; 13] = [
        Role::G,
        Role::GridTrade,
        Role::RecTrade,
        Role::CerTrade,
        Role::Charge,
        Role::Discharge,
        Role::Soc,
        Role::RecNet,
        Role::RecLevel,
        Role::RecRetired,
        Role::CerNet,
        Role::CerLevel,
        Role::CerQuota,
    ];

    pub fn offset(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Role::G => "g",
            Role::GridTrade => "G",
            Role::RecTrade => "R",
            Role::CerTrade => "C",
            Role::Charge => "P_c",
            Role::Discharge => "P_d",
            Role::Soc => "Q",
            Role::RecNet => "x_R",
            Role::RecLevel => "I_R",
            Role::RecRetired => "R_0",
            Role::CerNet => "x_C",
            Role::CerLevel => "I_C",
            Role::CerQuota => "C_0",
        }
    }
}

/// Time-major index map: variable `(t, role)` sits at `13·t + role`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableLayout {
    horizon: usize,
}

impl VariableLayout {
    pub fn new(horizon: usize) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::Parameter {
                key: "horizon",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self { horizon })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n(&self) -> usize {
        Role::COUNT * self.horizon
    }

    /// Index of `role` at zero-based hour `t`.
    pub fn index(&self, t: usize, role: Role) -> usize {
        debug_assert!(t < self.horizon);
        Role::COUNT * t + role.offset()
    }

    /// Inverse of [`index`](Self::index).
    pub fn locate(&self, j: usize) -> (usize, Role) {
        (j / Role::COUNT, Role::ALL[j % Role::COUNT])
    }

    /// Zero-based hour preceding `t` on the cyclic horizon.
    pub fn prev(&self, t: usize) -> usize {
        (t + self.horizon - 1) % self.horizon
    }

    /// Splits a flat vector into per-hour role arrays.
    pub fn recover(&self, x: &[f64]) -> Result<Vec<[f64; Role::COUNT]>, ModelError> {
        if x.len() != self.n() {
            return Err(ModelError::Dimension(format!(
                "vector has {} entries, layout expects {}",
                x.len(),
                self.n()
            )));
        }
        Ok(x.chunks_exact(Role::COUNT)
            .map(|c| c.try_into().unwrap())
            .collect())
    }

    pub fn flatten(&self, hours: &[[f64; Role::COUNT]]) -> Result<Vec<f64>, ModelError> {
        if hours.len() != self.horizon {
            return Err(ModelError::Dimension(format!(
                "{} hours given, layout expects {}",
                hours.len(),
                self.horizon
            )));
        }
        Ok(hours.iter().flatten().copied().collect())
    }

    /// All values of `role` across the horizon.
    pub fn series(&self, x: &[f64], role: Role) -> Vec<f64> {
        (0..self.horizon).map(|t| x[self.index(t, role)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_thirteen_roles() {
        assert_eq!(VariableLayout::new(1).unwrap().n(), 13);
        assert_eq!(VariableLayout::new(2).unwrap().n(), 26);
        assert_eq!(VariableLayout::new(168).unwrap().n(), 2184);
        assert!(VariableLayout::new(0).is_err());
    }

    #[test]
    fn index_is_a_bijection() {
        let lay = VariableLayout::new(5).unwrap();
        let mut seen = vec![false; lay.n()];
        for t in 0..5 {
            for role in Role::ALL {
                let j = lay.index(t, role);
                assert!(!seen[j]);
                seen[j] = true;
                assert_eq!(lay.locate(j), (t, role));
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn cyclic_predecessor_wraps() {
        let lay = VariableLayout::new(4).unwrap();
        assert_eq!(lay.prev(0), 3);
        assert_eq!(lay.prev(2), 1);
        assert_eq!(VariableLayout::new(1).unwrap().prev(0), 0);
    }

    #[test]
    fn wrong_length_rejected() {
        let lay = VariableLayout::new(2).unwrap();
        assert!(lay.recover(&[0.0; 25]).is_err());
        assert!(lay.flatten(&[[0.0; 13]]).is_err());
    }
}
