//! Operating-system entropy. Failures surface as errors; there is no
//! fallback generator.

use indlab_core::hv::LambdaSource;
use indlab_core::sequence::{SequenceSource, SourceKind};

fn os_u32() -> indlab_core::Result<u32> {
    let mut b = [0u8; 4];
    getrandom::fill(&mut b).map_err(|e| indlab_core::Error::Unavailable(format!("OS entropy: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

/// Uniform in `[0, k)` by rejection, so every symbol is exactly equiprobable.
fn os_below(k: u32) -> indlab_core::Result<u32> {
    if k == 0 {
        return Err(indlab_core::Error::InvalidArgument("empty range".into()));
    }
    let zone = u32::MAX - (u32::MAX % k + 1) % k;
    loop {
        let x = os_u32()?;
        if x <= zone {
            return Ok(x % k);
        }
    }
}

#[derive(Clone, Debug)]
pub struct OsEntropySource {
    alphabet_size: u32,
}

impl OsEntropySource {
    pub fn new(alphabet_size: u32) -> indlab_core::Result<Self> {
        if alphabet_size < 2 {
            return Err(indlab_core::Error::InvalidArgument("alphabet needs two symbols".into()));
        }
        Ok(OsEntropySource { alphabet_size })
    }
}

impl SequenceSource for OsEntropySource {
    fn kind(&self) -> SourceKind {
        SourceKind::OsEntropy
    }
    fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }
    fn next_symbol(&mut self) -> indlab_core::Result<u32> {
        os_below(self.alphabet_size)
    }
}

/// Uniform hidden states from OS entropy.
#[derive(Clone, Debug, Default)]
pub struct OsLambda;

impl LambdaSource for OsLambda {
    fn next_lambda(&mut self, states: u32) -> indlab_core::Result<u32> {
        os_below(states)
    }
    fn provenance(&self) -> String {
        "operating-system entropy (getrandom)".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_in_range() {
        let mut s = OsEntropySource::new(3).unwrap();
        assert!(!s.is_reproducible());
        for _ in 0..200 {
            assert!(s.next_symbol().unwrap() < 3);
        }
        assert!(OsEntropySource::new(1).is_err());
    }

    #[test]
    fn rejection_zone_is_whole_multiple() {
        for k in [2u32, 3, 7, 1000, u32::MAX] {
            let zone = u32::MAX - (u32::MAX % k + 1) % k;
            assert_eq!((zone as u64 + 1) % k as u64, 0, "k = {k}");
        }
    }
}
