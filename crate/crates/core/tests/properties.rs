use flipforge_core::datagen::{
    build_crop_bank, flip_pair, generate_pair, paste_event, BlendMask, CropPair, FramePair, GenConfig, PasteMode,
};
use flipforge_core::heatmap::{decode_hmap, encode_hmap, extract_peaks, render_targets, Heatmap, PeakParams};
use flipforge_core::image::{AnnotationSet, Frame, MitosisEvent, Point};
use flipforge_core::metrics::{match_detections, match_points, score, MatchConfig, SpaceTime};
use flipforge_core::simulate::{simulate, SimConfig};
use flipforge_core::Detection;
use proptest::prelude::*;

fn frame(w: usize, h: usize, t: usize) -> impl Strategy<Value = Frame> {
    prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |d| Frame::new(w, h, t, d).unwrap())
}

fn sorted_bits(f: &Frame) -> Vec<u64> {
    let mut v: Vec<u64> = f.data().iter().map(|x| x.to_bits()).collect();
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flip_is_an_involution_preserving_pixels(a in frame(12, 9, 0), b in frame(12, 9, 1)) {
        let p = FramePair { before: a, after: b, source_t: 1, flipped: false };
        let f = flip_pair(p.clone());
        let mut before = sorted_bits(&p.before);
        before.extend(sorted_bits(&p.after));
        before.sort_unstable();
        let mut after = sorted_bits(&f.before);
        after.extend(sorted_bits(&f.after));
        after.sort_unstable();
        prop_assert_eq!(before, after);
        prop_assert_eq!(flip_pair(f), p);
    }

    #[test]
    fn alpha_paste_is_convex_and_local(
        target in frame(24, 20, 0),
        patch_a in prop::collection::vec(0.0f64..=1.0, 64),
        patch_b in prop::collection::vec(0.0f64..=1.0, 64),
        alpha in prop::collection::vec(0.0f64..=1.0, 64),
        cx in 4usize..=20,
        cy in 4usize..=16,
    ) {
        let pair = FramePair {
            before: target.clone(),
            after: target.clone().with_t(1),
            source_t: 1,
            flipped: true,
        };
        let crop = CropPair::new(8, patch_a, patch_b, MitosisEvent::new(1, 4.0, 4.0)).unwrap();
        let mask = BlendMask::from_values(8, alpha).unwrap();
        let out = paste_event(&pair, &crop, &mask, Point::new(cx as f64, cy as f64), PasteMode::Alpha).unwrap();
        for (frame_in, frame_out, patch) in [
            (&pair.before, &out.before, crop.before_patch()),
            (&pair.after, &out.after, crop.after_patch()),
        ] {
            for y in 0..20 {
                for x in 0..24 {
                    let inside = x + 4 >= cx && x < cx + 4 && y + 4 >= cy && y < cy + 4;
                    let (v_in, v_out) = (frame_in.get(x, y), frame_out.get(x, y));
                    if inside {
                        let c = patch[(y + 4 - cy) * 8 + (x + 4 - cx)];
                        prop_assert!(v_out >= v_in.min(c) && v_out <= v_in.max(c));
                    } else {
                        prop_assert_eq!(v_in.to_bits(), v_out.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn fusion_ignores_order_and_duplicates(
        pts in prop::collection::vec((0.0f64..40.0, 0.0f64..30.0), 0..6),
        sigma in 1.0f64..8.0,
    ) {
        let events: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let mut reversed = events.clone();
        reversed.reverse();
        let mut doubled = events.clone();
        doubled.extend(events.iter().copied());
        let h = render_targets(&events, 40, 30, sigma).unwrap();
        prop_assert_eq!(&h, &render_targets(&reversed, 40, 30, sigma).unwrap());
        prop_assert_eq!(&h, &render_targets(&doubled, 40, 30, sigma).unwrap());
    }

    #[test]
    fn rendering_is_translation_equivariant(
        pts in prop::collection::vec((10.0f64..20.0, 10.0f64..20.0), 1..4),
        dx in 0usize..8,
        dy in 0usize..8,
    ) {
        let sigma = 3.0;
        let a: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let b: Vec<Point> = a.iter().map(|p| Point::new(p.x + dx as f64, p.y + dy as f64)).collect();
        let ha = render_targets(&a, 40, 40, sigma).unwrap();
        let hb = render_targets(&b, 40, 40, sigma).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                prop_assert!((ha.get(x, y) - hb.get(x + dx, y + dy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn peak_count_shrinks_with_threshold(
        values in prop::collection::vec(0.0f64..=1.0, 20 * 16),
        lo in 0.01f64..0.5,
        step in 0.0f64..0.49,
    ) {
        let h = Heatmap::new(20, 16, values).unwrap();
        let hi = lo + step;
        let p = |th| extract_peaks(&h, 0, &PeakParams { threshold: th, nms_radius: 1.0 }).len();
        prop_assert!(p(hi) <= p(lo));
        for d in extract_peaks(&h, 0, &PeakParams { threshold: lo, nms_radius: 2.5 }) {
            prop_assert!(d.score >= lo && d.score <= 1.0);
        }
    }

    #[test]
    fn hmap_round_trip_is_bit_exact(values in prop::collection::vec(0.0f32..=1.0, 0..200), w in 1usize..20) {
        let h_len = values.len() / w;
        let vals: Vec<f64> = values[..w * h_len].iter().map(|&v| f64::from(v)).collect();
        let h = Heatmap::new(w, h_len, vals).unwrap();
        let back = decode_hmap(&encode_hmap(&h)).unwrap();
        prop_assert_eq!(back.width(), w);
        for (a, b) in h.values().iter().zip(back.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn matching_is_one_to_one_and_symmetric(
        gt in prop::collection::vec((0usize..10, 0.0f64..60.0, 0.0f64..60.0), 0..12),
        det in prop::collection::vec((0usize..10, 0.0f64..60.0, 0.0f64..60.0), 0..12),
    ) {
        let cfg = MatchConfig::default();
        let g: Vec<SpaceTime> = gt.iter().map(|&(t, x, y)| SpaceTime { t, x, y }).collect();
        let d: Vec<SpaceTime> = det.iter().map(|&(t, x, y)| SpaceTime { t, x, y }).collect();
        let m = match_points(&g, &d, &cfg);
        prop_assert_eq!(m.matches.len() + m.false_negatives.len(), g.len());
        prop_assert_eq!(m.matches.len() + m.false_positives.len(), d.len());
        let mut gi: Vec<usize> = m.matches.iter().map(|x| x.gt).chain(m.false_negatives.iter().copied()).collect();
        gi.sort_unstable();
        prop_assert_eq!(gi, (0..g.len()).collect::<Vec<_>>());
        let mut di: Vec<usize> = m.matches.iter().map(|x| x.det).chain(m.false_positives.iter().copied()).collect();
        di.sort_unstable();
        prop_assert_eq!(di, (0..d.len()).collect::<Vec<_>>());

        let forward = score(&m);
        let swapped = score(&match_points(&d, &g, &cfg));
        prop_assert_eq!(forward.precision, swapped.recall);
        prop_assert_eq!(forward.recall, swapped.precision);
        prop_assert!((forward.f1 - swapped.f1).abs() < 1e-12);
    }

    #[test]
    fn matching_ignores_input_order(
        gt in prop::collection::vec((0usize..10, 0.0f64..60.0, 0.0f64..60.0), 1..10),
        det in prop::collection::vec((0usize..10, 0.0f64..60.0, 0.0f64..60.0), 1..10),
        rot in 0usize..10,
    ) {
        // continuous coordinates make exactly equal distance keys vanishingly rare
        let cfg = MatchConfig::default();
        let events: Vec<MitosisEvent> = gt.iter().map(|&(t, x, y)| MitosisEvent::new(t, x, y)).collect();
        let dets: Vec<Detection> = det.iter().map(|&(t, x, y)| Detection { t, x, y, score: 1.0 }).collect();
        let mut rotated = dets.clone();
        rotated.rotate_left(rot % dets.len());
        let mut reversed = events.clone();
        reversed.reverse();
        let a = score(&match_detections(&events, &dets, &cfg));
        let b = score(&match_detections(&reversed, &rotated, &cfg));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn far_detection_adds_one_false_positive(
        gt in prop::collection::vec((0usize..10, 0.0f64..60.0, 0.0f64..60.0), 0..10),
        det in prop::collection::vec((0usize..10, 0.0f64..60.0, 0.0f64..60.0), 0..10),
    ) {
        let cfg = MatchConfig::default();
        let events: Vec<MitosisEvent> = gt.iter().map(|&(t, x, y)| MitosisEvent::new(t, x, y)).collect();
        let mut dets: Vec<Detection> = det.iter().map(|&(t, x, y)| Detection { t, x, y, score: 1.0 }).collect();
        let before = match_detections(&events, &dets, &cfg);
        dets.push(Detection { t: 3, x: 500.0, y: 500.0, score: 1.0 });
        let after = match_detections(&events, &dets, &cfg);
        prop_assert_eq!(&after.matches, &before.matches);
        prop_assert_eq!(&after.false_negatives, &before.false_negatives);
        prop_assert_eq!(after.false_positives.len(), before.false_positives.len() + 1);
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

// Crops come from single-cell movies so each one shows its own division
// rather than siblings the feathered mask would leave behind.
fn isolated_division_bank() -> Vec<CropPair> {
    let mut bank = vec![];
    for seed in 0..40u64 {
        let sim = simulate(&SimConfig {
            width: 96,
            height: 96,
            n_frames: 8,
            n_cells: 1,
            division_rate: 0.3,
            seed,
            ..SimConfig::default()
        })
        .unwrap();
        let Some(first) = sim.annotations.events().first() else {
            continue;
        };
        let labels = AnnotationSet::new("single", vec![*first]).unwrap();
        if let Ok(b) = build_crop_bank(&sim.sequence, &labels, 40) {
            bank.extend(b.crops);
        }
        if bank.len() == 6 {
            break;
        }
    }
    bank
}

#[test]
fn pasted_signal_correlates_with_its_source_crop() {
    let bank = isolated_division_bank();
    assert_eq!(bank.len(), 6);
    let target = simulate(&SimConfig {
        width: 160,
        height: 160,
        n_frames: 10,
        n_cells: 8,
        seed: 21,
        ..SimConfig::default()
    })
    .unwrap()
    .sequence;
    let cfg = GenConfig::default();
    let mut checked = 0;
    for t in 1..target.len() {
        let lp = generate_pair(&target, t, &bank, &cfg, cfg.pair_seed(t)).unwrap();
        for (p, &id) in lp.events.iter().zip(&lp.crop_ids) {
            let (x0, y0) = (p.x as usize - 20, p.y as usize - 20);
            let crop = &bank[id];
            // later pastes can clip a corner of this window; the centre is untouched
            let r_before = pearson(&lp.pair.before.window(x0, y0, 40), crop.before_patch());
            let r_after = pearson(&lp.pair.after.window(x0, y0, 40), crop.after_patch());
            assert!(
                r_before > 0.5 && r_after > 0.5,
                "t={t} crop {id}: r=({r_before}, {r_after})"
            );
            checked += 1;
        }
    }
    assert!(checked > 10);
}
