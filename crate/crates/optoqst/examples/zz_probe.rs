use optoqst::nn::TrainConfig;
use optoqst::pauli::PauliSet;
use optoqst::qst::*;
use std::time::Instant;

fn main() {
    let cfg = TrainConfig { seed: 1, ..TrainConfig::default() };
    let t0 = Instant::now();
    let set = PauliSet::uda(2).unwrap();
    let (_, res) = train_qst(2, &set, 20_000, 2_000, SetId::Uda, &cfg).unwrap();
    println!("n=2 uda: mean={:.6} [{:.0}s]", res.mean_fidelity, t0.elapsed().as_secs_f64());
    let t0 = Instant::now();
    let set = PauliSet::enumerate(1).unwrap();
    let (_, res) = train_qst(1, &set, 20_000, 2_000, SetId::Seeded(1), &cfg).unwrap();
    println!("n=1 m=3: mean={:.6} [{:.0}s]", res.mean_fidelity, t0.elapsed().as_secs_f64());
}
