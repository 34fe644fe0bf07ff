use multiwit::algebra::{MultiIndex, VariableGrouping};
use multiwit::fixtures;
use multiwit::sysio::RandomSource;
use multiwit::tracker::TrackOptions;
use multiwit::witness::{coarsen, compute_witness_collection, refine, MultidegreeMap};

fn mi(s: &str, k: usize) -> MultiIndex {
    MultiIndex::parse(s, k).unwrap()
}

fn affine_cubic() -> multiwit::algebra::PolySystem {
    let c = fixtures::cubic();
    let g = VariableGrouping::single(c.grouping.names().to_vec(), "xy").unwrap();
    c.regrouped(g).unwrap()
}

#[test]
fn cubic_refinement_and_coarsening() {
    let opts = TrackOptions::default();
    let mut rs = RandomSource::new(11, 0);
    let aff = compute_witness_collection(&affine_cubic(), &[mi("1", 1)], &mut rs, &opts).unwrap();
    let ws = aff.witness_set(&mi("1", 1)).unwrap();
    assert_eq!(ws.degree(), 3);
    let (r10, s10) = refine(&ws, 0, &[0], &mi("10", 2), &mut rs, &opts).unwrap();
    let (r01, _) = refine(&ws, 0, &[0], &mi("01", 2), &mut rs, &opts).unwrap();
    assert_eq!((r10.degree(), r01.degree()), (2, 3));
    assert_eq!(s10.paths, 3);

    let wc = compute_witness_collection(&fixtures::cubic(), &[mi("10", 2), mi("01", 2)], &mut rs, &opts).unwrap();
    assert_eq!(wc.degrees(), MultidegreeMap::from_pairs(2, &[("10", 2), ("01", 3)]).unwrap());
    let rep = coarsen(&wc, &[0, 1], &mi("1", 1), &mut rs, &opts).unwrap();
    assert_eq!(rep.witness.degree(), 3);
    assert_eq!((rep.stats.paths, rep.stats.converged, rep.stats.diverged), (5, 3, 2));
}

#[test]
fn octahedron_degrees() {
    let opts = TrackOptions::default();
    let mut rs = RandomSource::new(5, 0);
    let keys = MultiIndex::all_with_total(&MultiIndex(vec![1; 4]), 2);
    let t = std::time::Instant::now();
    let fg = compute_witness_collection(&fixtures::octahedron_fg(), &keys, &mut rs, &opts).unwrap();
    let fh = compute_witness_collection(&fixtures::octahedron_fh(), &keys, &mut rs, &opts).unwrap();
    eprintln!("octahedron witness collections in {:?}", t.elapsed());
    assert_eq!(fg.degrees().to_string(), "{0011:2, 0101:3, 0110:4, 1001:3, 1010:4, 1100:4}");
    assert_eq!(fh.degrees().to_string(), "{0011:3, 0101:4, 0110:5, 1001:5, 1010:6, 1100:7}");
}

#[test]
fn coarsening_table() {
    use multiwit::witness::coarsen_collection;
    let opts = TrackOptions::default();
    let mut rs = RandomSource::new(21, 0);
    let keys = MultiIndex::all_with_total(&MultiIndex(vec![1; 4]), 2);
    let t = std::time::Instant::now();
    for (sys, want) in [
        (
            fixtures::octahedron_fg(),
            ["{002:2, 011:4, 101:4, 110:4}", "{011:2, 101:3, 110:4, 200:4}", "{02:2, 11:4, 20:4}", "{02:4, 11:4}"],
        ),
        (
            fixtures::octahedron_fh(),
            ["{002:3, 011:6, 101:8, 110:7}", "{011:3, 101:8, 110:10, 200:7}", "{02:3, 11:12, 20:7}", "{02:7, 11:11}"],
        ),
    ] {
        let wc = compute_witness_collection(&sys, &keys, &mut rs, &opts).unwrap();
        let (zw, reps) = coarsen_collection(&wc, &[2, 3], &mut rs, &opts).unwrap();
        for r in reps.values() {
            assert_eq!(r.stats.converged + r.stats.diverged, r.stats.paths);
        }
        assert_eq!(zw.degrees().to_string(), want[0]);
        let (xy, _) = coarsen_collection(&wc, &[0, 1], &mut rs, &opts).unwrap();
        assert_eq!(xy.degrees().to_string(), want[1]);
        let (both, _) = coarsen_collection(&xy, &[1, 2], &mut rs, &opts).unwrap();
        assert_eq!(both.degrees().to_string(), want[2]);
        let (yzw, _) = coarsen_collection(&wc, &[1, 2, 3], &mut rs, &opts).unwrap();
        assert_eq!(yzw.degrees().to_string(), want[3]);
    }
    eprintln!("coarsening table in {:?}", t.elapsed());
}

#[test]
fn direct_solve_in_coarse_grouping() {
    use multiwit::startsys::solve_zero_dim;
    let opts = TrackOptions::default();
    let mut rs = RandomSource::new(3, 0);
    let sys = fixtures::octahedron_fg();
    let (coarse, m) = sys.grouping.merge(&[1, 2, 3]).unwrap();
    let n = 4;
    let forms: Vec<_> = (0..2).map(|_| rs.affine_form(n, &coarse.group(m).vars)).collect();
    let pts = solve_zero_dim(&sys, &forms, &mut rs, &opts).unwrap();
    assert_eq!(pts.len(), 4);
}
