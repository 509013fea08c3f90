use repsel::core::Example;
use repsel::domains::SpaceConfig;
use repsel::predictor::{train_committee, Arch, TrainConfig};

fn main() {
    let n = 5usize;
    for samples in [150_000u64, 200_000] {
        let cfg = TrainConfig::new(samples, 1e-4, 606);
        let model = train_committee(&SpaceConfig::Ordering { n }, Arch::ordering_default(n), &cfg).unwrap();
        let two: Vec<_> = (0..2u8).map(|i| Example::new((i, i + 1), true)).collect();
        let four: Vec<_> = (0..4u8).map(|i| Example::new((i, i + 1), true)).collect();
        println!(
            "samples={samples}: 2-chain (0,2) -> {:.3}, contra (2,0) -> {:.3}, 4-chain (0,4) -> {:.3}",
            model.predict_ordering(&two, &(0, 2), true).unwrap(),
            model.predict_ordering(&two, &(2, 0), true).unwrap(),
            model.predict_ordering(&four, &(0, 4), true).unwrap(),
        );
    }
}
