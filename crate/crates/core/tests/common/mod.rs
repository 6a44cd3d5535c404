#![allow(dead_code)]

use proptest::prelude::*;

use uavqa::netmodel::{Point, RadioParams, Scenario};

/// Scenario with `m` UAVs and `n` GUs drawn uniformly in a `side` × `side` square.
pub fn scenario(m: usize, n: usize, k: usize, levels: usize, side: f64) -> impl Strategy<Value = Scenario> {
    let pt = move || (0.0..side, 0.0..side).prop_map(|(x, y)| Point::new(x, y));
    (prop::collection::vec(pt(), m), prop::collection::vec(pt(), n)).prop_map(move |(uavs, gus)| {
        let table = RadioParams::default().power_levels_dbm;
        let radio = RadioParams {
            num_subchannels: k,
            power_levels_dbm: table[table.len() - levels..].to_vec(),
            ..RadioParams::default()
        };
        Scenario::new(uavs, gus, radio).unwrap()
    })
}

/// Every `(channel, level)` choice per UAV, as mixed-radix codes.
pub fn choices(m: usize, k: usize, l: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    let per = k * l;
    (0..per.pow(m as u32)).map(move |code| {
        (0..m)
            .map(|u| {
                let c = code / per.pow(u as u32) % per;
                (c / l, c % l)
            })
            .collect()
    })
}
