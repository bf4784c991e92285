use crate::attack::{AttackSetting, DamageAutomaton, Semantics};
use crate::automata::{check_language_inclusion, Fsa};
use crate::supervision::ModelError;

/// Everything a bounded synthesis run needs.
#[derive(Debug, Clone)]
pub struct SynthesisInstance {
    setting: AttackSetting,
    plant: Fsa,
    lower: Fsa,
    upper: Fsa,
    damage: DamageAutomaton,
    /// Supervisor state bound.
    pub n: usize,
    /// Attacker state bound.
    pub m: usize,
    pub semantics: Semantics,
}

impl SynthesisInstance {
    /// Checks alphabets and `L(G1) ⊆ L(G2)`. Bounds default to `n = m = 1`
    /// with risky semantics.
    pub fn new(
        setting: AttackSetting,
        plant: Fsa,
        lower: Fsa,
        upper: Fsa,
        damage: DamageAutomaton,
    ) -> Result<Self, ModelError> {
        setting.check_fsa("plant", &plant)?;
        setting.check_fsa("lower", &lower)?;
        setting.check_fsa("upper", &upper)?;
        setting.check_fsa("damage", damage.fsa())?;
        if !check_language_inclusion(&lower, &upper) {
            return Err(ModelError::SpecOrder);
        }
        Ok(SynthesisInstance {
            setting,
            plant,
            lower,
            upper,
            damage,
            n: 1,
            m: 1,
            semantics: Semantics::Risky,
        })
    }

    pub fn with_bounds(mut self, n: usize, m: usize) -> Self {
        self.n = n;
        self.m = m;
        self
    }

    pub fn setting(&self) -> &AttackSetting {
        &self.setting
    }

    /// `G`.
    pub fn plant(&self) -> &Fsa {
        &self.plant
    }

    /// `G1`.
    pub fn lower(&self) -> &Fsa {
        &self.lower
    }

    /// `G2`.
    pub fn upper(&self) -> &Fsa {
        &self.upper
    }

    /// `H`.
    pub fn damage(&self) -> &DamageAutomaton {
        &self.damage
    }
}
