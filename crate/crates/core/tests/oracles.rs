mod common;

use common::*;
use tradecurrency::analysis::{
    group_membership, score_histogram, volume_fractions, VolumeShareMode,
};
use tradecurrency::centrality::{cheirank, google_matrix, pagerank, pagerank_of};
use tradecurrency::dynamics::{currency_scores, ScoreVector};
use tradecurrency::wtn::{flow_statistics, load_trade_flows};
use tradecurrency::{Currency, Dynamics, FlowRecord, TcpState, TradeMatrix, Weights};

const USD: Currency = Currency(0);
const EUR: Currency = Currency(1);
const BRI: Currency = Currency(2);

/// A=AR, B=BR, C=CL with flows B→A 10, A→B 30, C→A 20, A→C 5, B→C 15, C→B 10.
fn three_country() -> TradeMatrix {
    let recs: Vec<_> = [
        ("BR", "AR", 10.0),
        ("AR", "BR", 30.0),
        ("CL", "AR", 20.0),
        ("AR", "CL", 5.0),
        ("BR", "CL", 15.0),
        ("CL", "BR", 10.0),
    ]
    .iter()
    .map(|(e, i, v)| FlowRecord::new(2019, e, i, *v))
    .collect();
    load_trade_flows(&recs, 2019).unwrap().0
}

fn state(prefs: &[Currency], frozen: &[bool]) -> TcpState {
    TcpState {
        prefs: prefs.to_vec(),
        frozen: frozen.to_vec(),
    }
}

#[test]
fn two_country_totals_and_shares() {
    let recs = [
        FlowRecord::new(2019, "BR", "AR", 10.0),
        FlowRecord::new(2019, "AR", "BR", 30.0),
    ];
    let m = load_trade_flows(&recs, 2019).unwrap().0;
    assert_eq!(m.total_imports(), vec![10.0, 30.0]);
    assert_eq!(m.total_exports(), vec![30.0, 10.0]);
    let st = flow_statistics(&m);
    assert_eq!(st.s(0, 1), 1.0);
    assert_eq!(st.s(1, 0), 1.0);
    assert_eq!(st.import_ability, vec![0.25, 0.75]);
    assert_eq!(st.export_ability, vec![0.75, 0.25]);
}

#[test]
fn three_country_score_matches_definition() {
    let m = three_country();
    let st = flow_statistics(&m);
    let w = Weights::direct(&st);
    let s = state(&[BRI, USD, BRI], &[false, true, true]);
    let z = currency_scores(0, &s, &st, &w, 3).unwrap();
    let oracle = oracle_scores(&flows_of(&m), &[2, 0, 2], 0, 3, None).unwrap();
    for (a, b) in z.z.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12);
    }
    // by hand: A(A,B) ∝ (6/7 + 1/3)·65, A(A,C) ∝ (1/7 + 2/3)·50
    assert!((z.z[0] - 65.0 / 99.0).abs() < 1e-12);
    assert!((z.z[2] - 34.0 / 99.0).abs() < 1e-12);
    assert_eq!(z.z[1], 0.0);
}

#[test]
fn three_country_sweep_with_injected_order() {
    let m = three_country();
    let flows = flows_of(&m);
    let st = flow_statistics(&m);
    let d = Dynamics::new(&st, &Weights::direct(&st), 3).unwrap();
    for init in [[EUR, EUR, BRI], [BRI, USD, EUR], [USD, BRI, BRI]] {
        for order in [[0, 1, 2], [2, 1, 0], [1, 0, 2]] {
            let frozen = [false, false, false];
            let mut s = state(&init, &frozen);
            let mut o: Vec<usize> = init.iter().map(|c| c.id()).collect();
            let dc = d.sweep_in_order(&mut s, &order);
            let oc = oracle_sweep(&flows, &mut o, &frozen, &order, 3);
            assert_eq!(dc, oc);
            assert_eq!(s.prefs.iter().map(|c| c.id()).collect::<Vec<_>>(), o);
        }
    }
}

#[test]
fn hand_state_is_not_a_fixed_point() {
    let m = three_country();
    let st = flow_statistics(&m);
    let d = Dynamics::new(&st, &Weights::direct(&st), 3).unwrap();
    // A holds EUR but both partners disagree with it
    let s = state(&[EUR, USD, BRI], &[false, true, true]);
    assert!(!d.is_fixed_point(&s));
    assert!(!oracle_fixed(
        &flows_of(&m),
        &[1, 0, 2],
        &[false, true, true],
        3
    ));
    let s = state(&[USD, USD, BRI], &[false, true, true]);
    assert!(d.is_fixed_point(&s));
}

#[test]
fn ternary_rows_equal_currency_scores() {
    let m = three_country();
    let st = flow_statistics(&m);
    let w = Weights::direct(&st);
    let d = Dynamics::new(&st, &w, 3).unwrap();
    let s = state(&[USD, EUR, BRI], &[false, false, false]);
    let rows = tradecurrency::analysis::ternary_coordinates(&s, &d);
    for (c, row) in rows.iter().enumerate() {
        assert_eq!(*row, currency_scores(c, &s, &st, &w, 3).unwrap());
        assert!((row.z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hand_histogram() {
    let sv = |z: [f64; 3]| ScoreVector {
        z: z.to_vec(),
        defined: true,
    };
    let scores = vec![
        sv([0.05, 0.25, 0.7]),
        sv([0.3, 0.3, 0.4]),
        sv([1.0, 0.0, 0.0]),
        ScoreVector {
            z: vec![0.0; 3],
            defined: false,
        },
    ];
    let h = score_histogram(&scores, 3, 0.5).unwrap();
    assert_eq!(h.bins, 2);
    assert_eq!(h.fractions[0], vec![0.5, 0.25]);
    assert_eq!(h.fractions[1], vec![0.75, 0.0]);
    assert_eq!(h.fractions[2], vec![0.5, 0.25]);
}

#[test]
fn two_country_volume_shares() {
    let recs = [
        FlowRecord::new(2019, "BR", "AR", 10.0),
        FlowRecord::new(2019, "AR", "BR", 30.0),
    ];
    let m = load_trade_flows(&recs, 2019).unwrap().0;
    let st = flow_statistics(&m);
    let g = group_membership(
        &[USD, EUR],
        &[None, None],
        &st,
        m.index(),
        &["USD".into(), "EUR".into()],
    )
    .unwrap();
    let v = volume_fractions(&g, &m, VolumeShareMode::Symmetric);
    assert_eq!(v.group, vec![(10.0 + 30.0) / 80.0, (30.0 + 10.0) / 80.0]);
}

#[test]
fn hand_group_order() {
    let m = three_country();
    let st = flow_statistics(&m);
    // P = (30, 40, 20)/90, P* = (35, 25, 30)/90: max = 35, 40, 30
    let g = group_membership(&[USD; 3], &[None; 3], &st, m.index(), &["USD".into()]).unwrap();
    let order: Vec<&str> = g.groups[0]
        .members
        .iter()
        .map(|m| m.code.as_str())
        .collect();
    assert_eq!(order, ["BR", "AR", "CL"]);
}

#[test]
fn pagerank_hub_matches_dense_solve() {
    // chain 0→1→2→3 plus heavy flows from every node into the hub 3
    let mut f = vec![vec![0.0; 4]; 4];
    f[1][0] = 1.0;
    f[2][1] = 1.0;
    f[3][2] = 1.0;
    f[3][0] = 5.0;
    f[3][1] = 5.0;
    f[0][3] = 1.0;
    let m = matrix_of(&f, &codes(4));
    let st = flow_statistics(&m);
    let pr = pagerank_of(&st, 0.85, 1e-10, 10_000).unwrap();
    let (s, _) = oracle_shares(&f);
    let exact = dense_stationary(&s, 4, 0.85);
    let l1: f64 = pr
        .values
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .sum();
    assert!(l1 < 1e-8, "{l1}");
    assert!((0..3).all(|c| pr.values[3] > pr.values[c]));
}

#[test]
fn cheirank_two_country_is_even() {
    // S* on two countries is the swap permutation, whatever the volumes
    let f = vec![vec![0.0, 10.0], vec![30.0, 0.0]];
    let m = matrix_of(&f, &["AR", "BR"]);
    let cr = cheirank(&flow_statistics(&m), 0.85, 1e-10, 10_000).unwrap();
    let (_, s_star) = oracle_shares(&f);
    let exact = dense_stationary(&s_star, 2, 0.85);
    assert!((cr.values[0] - exact[0]).abs() < 1e-12);
    assert!((cr.values[0] - 0.5).abs() < 1e-12);
}

#[test]
fn cheirank_favours_main_exporter() {
    // AR exports to both partners; BR and CL mostly buy from AR
    let mut f = vec![vec![0.0; 3]; 3];
    f[1][0] = 30.0;
    f[2][0] = 30.0;
    f[0][1] = 10.0;
    f[2][1] = 1.0;
    f[0][2] = 10.0;
    f[1][2] = 1.0;
    let m = matrix_of(&f, &["AR", "BR", "CL"]);
    let cr = cheirank(&flow_statistics(&m), 0.85, 1e-10, 10_000).unwrap();
    let (_, s_star) = oracle_shares(&f);
    let exact = dense_stationary(&s_star, 3, 0.85);
    let l1: f64 = cr
        .values
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .sum();
    assert!(l1 < 1e-8);
    assert!(cr.values[0] > cr.values[1] && cr.values[0] > cr.values[2]);
}

#[test]
fn google_matrix_columns_sum_to_one_with_dangling() {
    let mut f = vec![vec![0.0; 3]; 3];
    f[1][0] = 2.0;
    f[2][0] = 1.0;
    let m = matrix_of(&f, &codes(3));
    let st = flow_statistics(&m);
    let g = google_matrix(st.import_share(), 3, 0.85).unwrap();
    for col in 0..3 {
        let s: f64 = (0..3).map(|r| g.get(r, col)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    let p = pagerank(&g, 1e-10, 10_000).unwrap();
    assert!((p.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
