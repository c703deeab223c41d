use super::{
    AutoregressiveOracle, ConditionalOracle, ContextGenerativeOracle, ContextTemplate, CstpError,
    MembershipOracle, Prob,
};

/// Baseline oracle whose scores are pseudo-random but fixed for a given
/// seed, term and context. Any comparison built on it is a fair coin.
#[derive(Clone, Copy, Debug)]
pub struct CoinFlipOracle {
    seed: u64,
}

impl CoinFlipOracle {
    pub fn new(seed: u64) -> Self {
        CoinFlipOracle { seed }
    }

    fn draw(&self, parts: &[&str]) -> Prob {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ self.seed;
        for part in parts {
            for byte in part.bytes().chain([0xff]) {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        let u = ((splitmix(h) >> 11) + 1) as f64 / (1u64 << 53) as f64;
        Prob::new(u).expect("u lies in (0, 1]")
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ConditionalOracle for CoinFlipOracle {
    fn conditional(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError> {
        Ok(self.draw(&["conditional", term, &context.to_string()]))
    }
}

impl ContextGenerativeOracle for CoinFlipOracle {
    fn likelihood(&self, context: &ContextTemplate, term: &str) -> Result<Prob, CstpError> {
        Ok(self.draw(&["likelihood", term, &context.to_string()]))
    }

    fn prior(&self, _term: &str) -> Result<Prob, CstpError> {
        Ok(Prob::ONE)
    }
}

impl MembershipOracle for CoinFlipOracle {
    fn membership(&self, term: &str, context: &ContextTemplate) -> Result<Prob, CstpError> {
        Ok(self.draw(&["membership", term, &context.to_string()]))
    }
}

impl AutoregressiveOracle for CoinFlipOracle {
    fn next_prob(&self, prefix: &[String], token: &str) -> Result<Prob, CstpError> {
        Ok(self.draw(&["next", token, &prefix.join(" ")]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstp::{prefer_direct, Winner};

    #[test]
    fn deterministic_and_roughly_fair() {
        let coin = CoinFlipOracle::new(7);
        let mut first = 0;
        for i in 0..2000 {
            let c = ContextTemplate::parse(&format!("w{i} _ end")).unwrap();
            let a = prefer_direct(&coin, &c, "left", "right").unwrap();
            let b = prefer_direct(&coin, &c, "left", "right").unwrap();
            assert_eq!(a, b);
            if a.winner == Winner::First {
                first += 1;
            }
        }
        assert!((900..1100).contains(&first), "{first}");
    }
}
