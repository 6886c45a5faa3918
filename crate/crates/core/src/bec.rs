//! Bhattacharyya parameters on the binary erasure channel.
//!
//! On the BEC the recursion `Z- = 2Z - Z^2`, `Z+ = Z^2` is exact, so with a
//! rational erasure probability it gives an exact reliability ordering.

use num_traits::Num;

use crate::index::ChannelIndex;

pub fn z_minus<T: Num + Clone>(z: &T) -> T {
    let two = T::one() + T::one();
    two * z.clone() - z.clone() * z.clone()
}

pub fn z_plus<T: Num + Clone>(z: &T) -> T {
    z.clone() * z.clone()
}

/// All `2^n` parameters, position `k` holding the channel with MSB-first expansion `k`.
pub fn bhattacharyya<T: Num + Clone>(n: u32, eps: T) -> Vec<T> {
    let mut level = vec![eps];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for z in &level {
            next.push(z_minus(z));
            next.push(z_plus(z));
        }
        level = next;
    }
    level
}

/// Parameter of one channel by folding its sign sequence.
pub fn bhattacharyya_chain<T: Num + Clone>(index: ChannelIndex, eps: T) -> T {
    index
        .bits()
        .into_iter()
        .fold(eps, |z, b| if b == 1 { z_plus(&z) } else { z_minus(&z) })
}
