use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Rat};
use crate::zoo::FunctionSpec;

/// Deepest cover level checked.
pub const MAX_COVER_LEVEL: u32 = 24;

/// The level-j cover of the Cantor set by `2^j` intervals of length `3^-j`,
/// pushed through the directional Cantor function along `t1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LuzinCheck {
    pub level: u32,
    pub intervals: u64,
    /// Total `t1`-length of the cover, `(2/3)^j`.
    pub length: Rat,
    /// Whether the image intervals tile `[0, 1]` exactly, end to end.
    pub covers_unit: bool,
    /// Total length of the image intervals.
    pub image_length: Rat,
}

/// Left endpoints of the level-j cover, in increasing order.
fn cover_lefts(j: u32) -> Vec<Rat> {
    let third = Rat::new(1, 3);
    let mut lefts = vec![Rat::zero()];
    let mut len = Rat::one();
    for _ in 0..j {
        len = &len * &third;
        let skip = &len * Rat::from_int(2);
        lefts = lefts.iter().flat_map(|l| [l.clone(), l + &skip]).collect();
    }
    lefts
}

/// Exact check that a null-bound cover of the Cantor set maps onto `[0, 1]`.
pub fn luzin_cover(j: u32) -> Result<LuzinCheck> {
    if j > MAX_COVER_LEVEL {
        return Err(Error::Parameter(format!("cover level {j} exceeds {MAX_COVER_LEVEL}")));
    }
    let f = FunctionSpec::CantorDirectional { n: 2 };
    let len = Rat::new(1, 3).pow(j as i32);
    // The point (-t, t) has first diagonal coordinate t.
    let at = |t: &Rat| -> Result<Rat> {
        let v = f.eval(&Point(vec![-t, t.clone()]))?;
        v.as_exact()
            .cloned()
            .ok_or_else(|| Error::Parameter("cantor value was not exact".into()))
    };
    let images: Vec<(Rat, Rat)> = cover_lefts(j)
        .par_iter()
        .map(|l| Ok((at(l)?, at(&(l + &len))?)))
        .collect::<Result<_>>()?;
    let mut covers = images.first().is_some_and(|(a, _)| a.is_zero())
        && images.last().is_some_and(|(_, b)| *b == Rat::one());
    covers &= images.windows(2).all(|w| w[0].1 == w[1].0);
    covers &= images.iter().all(|(a, b)| a < b);
    let image_length = images.iter().map(|(a, b)| b - a).sum();
    Ok(LuzinCheck {
        level: j,
        intervals: images.len() as u64,
        length: Rat::new(2, 3).pow(j as i32),
        covers_unit: covers,
        image_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_covers_tile_the_unit_interval() {
        for j in 0..=8 {
            let c = luzin_cover(j).unwrap();
            assert!(c.covers_unit, "level {j}");
            assert_eq!(c.intervals, 1 << j);
            assert_eq!(c.image_length, Rat::one());
            let direct: Rat = cover_lefts(j).iter().map(|_| Rat::new(1, 3).pow(j as i32)).sum();
            assert_eq!(direct, c.length);
        }
    }
}
