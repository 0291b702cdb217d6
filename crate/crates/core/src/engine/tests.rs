use super::*;
use crate::geometry::{oracle_layers_prefix, oracle_topk, OracleSet};

fn pts(cs: &[(i64, i64)]) -> Vec<Point> {
    cs.iter()
        .enumerate()
        .map(|(i, &(x, y))| Point::new(i as u64, x, y))
        .collect()
}

fn engine(cs: &[(i64, i64)], k: usize, mode: Mode, dynamic: Dynamism) -> Engine {
    Engine::with_points(EngineConfig::new(k, mode, dynamic), pts(cs)).unwrap()
}

fn answer(e: &mut Engine) -> Vec<((i64, i64), u64)> {
    e.query().iter().map(|r| ((r.x, r.y), r.score)).collect()
}

const CHAIN: [(i64, i64); 3] = [(1, 1), (2, 2), (3, 3)];
const D3: [(i64, i64); 5] = [(1, 4), (2, 2), (4, 1), (3, 3), (5, 5)];
const MODES: [Mode; 2] = [Mode::Klist, Mode::Onelist];

#[test]
fn construction_examples() {
    let mut e = engine(&[], 3, Mode::Klist, Dynamism::Semi);
    assert!(answer(&mut e).is_empty());

    let e = engine(&CHAIN, 2, Mode::Klist, Dynamism::Semi);
    assert_eq!(e.layers_dump(), "(1,1,2)\n(2,2,1)\n");
    assert_eq!(e.tail_len(), 1);
    assert_eq!(e.frontier(), 2);

    let anti = [(1, 5), (2, 4), (3, 3), (4, 2), (5, 1)];
    let e = engine(&anti, 3, Mode::Klist, Dynamism::Semi);
    assert_eq!(e.layer_count(), 1);
    assert_eq!(e.layer(0).unwrap().len(), 5);

    let err = Engine::with_points(
        EngineConfig::new(1, Mode::Klist, Dynamism::Semi),
        pts(&[(1, 1), (1, 1)]),
    );
    assert!(matches!(
        err,
        Err(EngineError::Geometry(GeometryError::DuplicatePoint(_)))
    ));
    assert!(Engine::new(EngineConfig::new(0, Mode::Klist, Dynamism::Semi)).is_err());
    assert!(
        Engine::new(EngineConfig::new(1, Mode::Klist, Dynamism::Semi).with_arity(2, 3)).is_err()
    );
}

#[test]
fn insert_demotes_whole_layer() {
    for dynamic in [Dynamism::Semi, Dynamism::Full] {
        let mut e = engine(&[(1, 3), (2, 2), (3, 1)], 1, Mode::Klist, dynamic);
        e.insert(Point::new(9, 0, 0)).unwrap();
        let layers = e.layers();
        assert_eq!(layers[0].len(), 1);
        assert_eq!(
            (layers[0][0].x, layers[0][0].y, layers[0][0].score),
            (0, 0, 3)
        );
        match dynamic {
            Dynamism::Semi => assert_eq!(e.tail_len(), 3),
            Dynamism::Full => {
                let second: Vec<_> = layers[1].iter().map(|p| (p.x, p.y)).collect();
                assert_eq!(second, vec![(1, 3), (2, 2), (3, 1)]);
            }
        }
    }
}

#[test]
fn insert_joins_second_layer() {
    let mut e = engine(
        &[(10, 30), (20, 20), (30, 10)],
        2,
        Mode::Klist,
        Dynamism::Semi,
    );
    e.insert(Point::new(9, 25, 25)).unwrap();
    assert_eq!(
        e.layers_dump(),
        "(10,30,0) (20,20,1) (30,10,0)\n(25,25,0)\n"
    );
}

#[test]
fn insert_into_tail_keeps_layers() {
    let mut e = engine(&CHAIN, 2, Mode::Klist, Dynamism::Semi);
    e.insert(Point::new(9, 4, 4)).unwrap();
    assert_eq!(e.layers_dump(), "(1,1,3)\n(2,2,2)\n");
    assert_eq!(e.tail_len(), 2);
    assert_eq!(e.stats().last_cascade_depth, 0);
    assert!(matches!(
        e.insert(Point::new(10, 4, 4)),
        Err(EngineError::Geometry(GeometryError::DuplicatePoint(_)))
    ));
}

#[test]
fn delete_examples() {
    for mode in MODES {
        let mut e = engine(&CHAIN, 1, mode, Dynamism::Full);
        e.delete(Coord::new(1, 1)).unwrap();
        assert_eq!(answer(&mut e), vec![((2, 2), 1)]);

        let mut e = engine(&CHAIN, 1, mode, Dynamism::Full);
        e.delete(Coord::new(3, 3)).unwrap();
        let scores: Vec<i64> = e.layers().iter().flatten().map(|p| p.score).collect();
        assert_eq!(scores[..2], [1, 0]);

        let mut e = engine(&CHAIN, 1, mode, Dynamism::Full);
        assert!(matches!(
            e.delete(Coord::new(7, 7)),
            Err(EngineError::Absent(_))
        ));
    }
    let mut e = engine(&CHAIN, 1, Mode::Klist, Dynamism::Semi);
    assert!(matches!(
        e.delete(Coord::new(1, 1)),
        Err(EngineError::Unsupported(_))
    ));
}

#[test]
fn query_examples() {
    for mode in MODES {
        let mut e = engine(&D3, 2, mode, Dynamism::Semi);
        assert_eq!(answer(&mut e), vec![((2, 2), 2), ((1, 4), 1)]);
        let mut e = engine(&CHAIN, 5, mode, Dynamism::Full);
        assert_eq!(answer(&mut e), vec![((1, 1), 2), ((2, 2), 1), ((3, 3), 0)]);
    }
}

#[test]
fn rebuild_is_idempotent() {
    let mut e = engine(&D3, 2, Mode::Klist, Dynamism::Full);
    let before = e.layers_dump();
    e.rebuild();
    let once = e.layers_dump();
    e.rebuild();
    assert_eq!(once, e.layers_dump());
    assert_eq!(before, once);
}

#[test]
fn ceil_sqrt_values() {
    let got: Vec<usize> = [0, 1, 2, 4, 5, 9, 10, 1 << 20]
        .iter()
        .map(|&n| ceil_sqrt(n))
        .collect();
    assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 1 << 10]);
}

// Small xorshift stream so that this module needs no extra dependencies.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn below(&mut self, n: u64) -> i64 {
        (self.next() % n) as i64
    }
}

fn check_prefix(e: &Engine, oracle: &OracleSet, k: usize) {
    e.validate().unwrap();
    let want = oracle_layers_prefix(oracle.points(), e.frontier()).unwrap();
    let got = e.layers();
    assert_eq!(got.len(), want.len(), "layer count");
    for (i, (g, w)) in got.iter().zip(&want).enumerate() {
        let gc: Vec<(i64, i64)> = g.iter().map(|p| (p.x, p.y)).collect();
        let wc: Vec<(i64, i64)> = w.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(gc, wc, "layer {i}");
        if i < k {
            for p in g {
                assert_eq!(
                    p.score as u64,
                    oracle.score(p.id).unwrap(),
                    "score of ({},{})",
                    p.x,
                    p.y
                );
            }
        }
    }
}

#[test]
fn random_updates_match_oracle() {
    for seed in 1..=40u64 {
        let mut rng = Rng(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
        let k = [1, 2, 3, 5][seed as usize % 4];
        let mode = MODES[seed as usize % 2];
        let dynamic = if seed % 3 == 0 {
            Dynamism::Semi
        } else {
            Dynamism::Full
        };
        let range = [8, 30, 1000][seed as usize % 3];
        let mut e = Engine::new(EngineConfig::new(k, mode, dynamic)).unwrap();
        let mut oracle = OracleSet::new();
        let mut live: Vec<Point> = Vec::new();
        for id in 0..150u64 {
            let delete = dynamic == Dynamism::Full && !live.is_empty() && rng.below(3) == 0;
            if delete {
                let p = live.swap_remove(rng.below(live.len() as u64) as usize);
                e.delete(p.coord()).unwrap();
                oracle.remove(p.id).unwrap();
            } else {
                let p = Point::new(id, rng.below(range), rng.below(range));
                if oracle.contains(p.coord()) {
                    continue;
                }
                e.insert(p).unwrap();
                oracle.insert(p).unwrap();
                live.push(p);
            }
            check_prefix(&e, &oracle, k);
            assert_eq!(e.query(), oracle.topk(k), "seed {seed} op {id}");
        }
        assert_eq!(e.query(), oracle_topk(oracle.points(), k).unwrap());
    }
}
