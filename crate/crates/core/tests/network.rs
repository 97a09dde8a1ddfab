use rand::seq::SliceRandom;

use warmstart::nn::{train, Model, NetShape, ReplayBuffer, TrainConfig, TrainingExample};
use warmstart::rng::substream;
use warmstart::{GameKind, GameState};

fn positions(kind: GameKind, n: usize) -> Vec<GameState> {
    let mut rng = substream(4, "positions", &[kind as u64]);
    let mut out = Vec::new();
    let mut s = GameState::new(kind, 6, 4).unwrap();
    while out.len() < n {
        if s.is_terminal() {
            s = GameState::new(kind, 6, 4).unwrap();
        }
        out.push(s);
        s = s.apply_move(*s.legal_moves().choose(&mut rng).unwrap()).unwrap();
    }
    out
}

#[test]
fn predictions_are_distributions_and_values_in_range() {
    for kind in GameKind::ALL {
        let model = Model::seeded(NetShape::new(kind, 6), 1);
        for s in positions(kind, 20) {
            let p = model.predict(&s.encode().to_f32()).unwrap();
            assert_eq!(p.policy.len(), s.action_size());
            assert!(p.policy.iter().all(|x| x.is_finite() && *x >= 0.0));
            assert!((p.policy.iter().sum::<f64>() - 1.0).abs() < 1e-5);
            assert!(p.value > -1.0 && p.value < 1.0);
        }
    }
}

#[test]
fn training_fits_a_small_buffer() {
    let kind = GameKind::ConnectFour;
    let model = Model::seeded(NetShape::with_widths(kind, 6, 8, 32), 2);
    let examples: Vec<TrainingExample> = positions(kind, 48)
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let mut pi = vec![0.0f32; s.action_size()];
            let legal = s.legal_moves();
            pi[legal[k % legal.len()].index()] = 1.0;
            TrainingExample {
                encoding: s.encode(),
                pi,
                z: if k % 3 == 0 { 1.0 } else { -1.0 },
            }
        })
        .collect();
    let mut buffer = ReplayBuffer::new(1);
    buffer.append(examples);
    let cfg = TrainConfig {
        epochs: 30,
        batch_size: 16,
        learning_rate: 0.005,
        dropout: 0.0,
    };
    let out = train(&model, &buffer, &cfg, &mut substream(2, "fit", &[])).unwrap();
    let first = out.epoch_losses[0];
    let last = *out.epoch_losses.last().unwrap();
    assert!(last < 0.5 * first, "{first} -> {last}");
    assert!(out.model.is_finite());
}
