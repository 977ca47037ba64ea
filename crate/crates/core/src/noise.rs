//! Reproducible Gaussian noise.
//!
//! Every standard normal variable ξ_j consumed by the fBm generators is a pure
//! function of `(seed, stream, j)`: a ChaCha8 keystream addressed by word
//! position supplies one 64-bit uniform per index, and the uniform is mapped
//! through Wichura's AS241 (PPND16) rational approximation of the normal
//! quantile. Two generators fed the same [`Seed`] therefore see the same ξ
//! sequence, which couples paths across methods and Hurst parameters.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Key of a noise sequence. `stream` separates replicates of one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub key: u64,
    #[serde(default)]
    pub stream: u64,
}

impl Seed {
    pub fn new(key: u64) -> Self {
        Seed { key, stream: 0 }
    }

    /// Seed of replicate `r` under master seed `master`.
    pub fn replicate(master: u64, r: u64) -> Self {
        Seed {
            key: master,
            stream: r,
        }
    }

    /// Seeds of replicates `0..count`.
    pub fn replicates(master: u64, count: usize) -> Vec<Seed> {
        (0..count as u64).map(|r| Seed::replicate(master, r)).collect()
    }
}

impl From<u64> for Seed {
    fn from(key: u64) -> Self {
        Seed::new(key)
    }
}

/// Counter-addressed stream of standard normal variables.
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: Seed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.key);
        rng.set_stream(seed.stream);
        NoiseStream { rng }
    }

    /// ξ_j, independent of how many variables were drawn before.
    pub fn normal_at(&mut self, j: u64) -> f64 {
        self.rng.set_word_pos(2 * j as u128);
        normal_quantile(unit_open(self.rng.next_u64()))
    }

    /// ξ_0, ..., ξ_{n-1}.
    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        self.rng.set_word_pos(0);
        (0..n)
            .map(|_| normal_quantile(unit_open(self.rng.next_u64())))
            .collect()
    }
}

/// ξ_0, ..., ξ_{n-1} for `seed`.
pub fn standard_normals(seed: Seed, n: usize) -> Vec<f64> {
    NoiseStream::new(seed).normals(n)
}

/// Maps 64 random bits to the open interval (0, 1) on a 2^-53 lattice.
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

// AS241 PPND16 coefficients, constant term first.
const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_608_0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
const NEAR_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const NEAR_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const FAR_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const FAR_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn horner(c: &[f64; 8], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * r + k)
}

/// Standard normal quantile, Wichura (1988) algorithm AS241 `PPND16`.
///
/// Relative accuracy about 1e-16 over (0, 1). Returns ±∞ at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&CENTRAL_NUM, r) / horner(&CENTRAL_DEN, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        horner(&NEAR_NUM, r) / horner(&NEAR_DEN, r)
    } else {
        let r = r - 5.0;
        horner(&FAR_NUM, r) / horner(&FAR_DEN, r)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
