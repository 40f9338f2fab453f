use probreg_core::autodiff::gradcheck::check;
use probreg_core::autodiff::{Adam, AdamConfig, Rng, Tape, Tensor};
use probreg_core::bnn::{BnnModel, ElboWeights, Noise};
use probreg_core::mdn::MdnModel;

const H: f64 = 1e-6;

fn perturb(params: &[Tensor<f64>], sd: f64, rng: &mut Rng) -> Vec<Tensor<f64>> {
    params.iter().map(|p| rng.normal_tensor::<f64>(p.rows(), p.cols()).map(|v| sd * v)).collect()
}

#[test]
fn affine_weight_gradient_matches_differences() {
    let mut rng = Rng::seed_from_u64(11);
    let x = rng.normal_tensor::<f64>(3, 4);
    let params = vec![rng.normal_tensor::<f64>(4, 2), rng.normal_tensor::<f64>(1, 2)];
    let loss = |p: &[Tensor<f64>]| Ok(Tensor::affine(&x, &p[0], &p[1])?.sum());
    let mut tape = Tape::new();
    let xv = tape.constant(x.clone());
    let w = tape.param(params[0].clone());
    let b = tape.param(params[1].clone());
    let out = tape.affine(xv, w, b).unwrap();
    let s = tape.sum(out);
    let g = tape.backward(s).unwrap();
    let analytic = vec![g.get(w).unwrap().clone(), g.get(b).unwrap().clone()];
    assert!(check(&params, &analytic, H, loss).unwrap().max_rel_err < 1e-5);
}

#[test]
fn full_mdn_loss_on_four_points() {
    let mut rng = Rng::seed_from_u64(21);
    let x = Tensor::column(&[-1.5, -0.2, 0.4, 2.2]);
    let y = Tensor::column(&[0.7, -1.1, 0.05, 1.9]);
    for _ in 0..20 {
        let mut model = MdnModel::<f64>::init(6, 3, 1e-3, &mut rng).unwrap();
        let params = perturb(&model.parameters(), 0.5, &mut rng);
        model.set_parameters(&params).unwrap();
        let (_, grads) = model.loss_and_grads(&x, &y).unwrap();
        let mut probe = model.clone();
        let r = check(&params, &grads, H, |p| {
            probe.set_parameters(p)?;
            probe.loss(&x, &y)
        })
        .unwrap();
        assert!(r.max_rel_err < 1e-4, "{r:?}");
    }
}

#[test]
fn bnn_elbo_with_frozen_noise() {
    let mut rng = Rng::seed_from_u64(31);
    let x = Tensor::column(&[-2.0, -0.5, 0.3, 1.7, 2.9]);
    let y = Tensor::column(&[-7.5, 0.1, 0.0, 4.4, 20.0]);
    for learn_noise in [true, false] {
        for _ in 0..10 {
            let mut model = BnnModel::<f64>::init(7, 0.05, 0.5, &mut rng).unwrap();
            let params = perturb(&model.parameters(learn_noise), 0.5, &mut rng);
            model.set_parameters(&params).unwrap();
            let noise = Noise::sample(&model, &mut rng);
            let w = ElboWeights::with_kl(0.1);
            let (_, grads) = model.elbo_and_grads(&x, &y, &noise, w, learn_noise).unwrap();
            let mut probe = model.clone();
            let r = check(&params, &grads, H, |p| {
                probe.set_parameters(p)?;
                probe.elbo_value(&x, &y, &noise, w)
            })
            .unwrap();
            assert!(r.max_rel_err < 1e-4, "learn_noise={learn_noise}: {r:?}");
        }
    }
}

#[test]
fn adam_runs_are_bit_identical() {
    let run = || {
        let mut rng = Rng::seed_from_u64(5);
        let mut model = MdnModel::<f64>::init(8, 2, 1e-3, &mut rng).unwrap();
        let x = rng.uniform_tensor(16, 1, -3.0, 3.0);
        let y = x.map(|v| v * v * v);
        let mut params = model.parameters();
        let mut adam = Adam::new(AdamConfig::default(), &params);
        for _ in 0..100 {
            let (_, g) = model.loss_and_grads(&x, &y).unwrap();
            adam.step(&mut params, &g).unwrap();
            model.set_parameters(&params).unwrap();
        }
        params
    };
    let (a, b) = (run(), run());
    for (p, q) in a.iter().zip(&b) {
        assert!(p.data().iter().zip(q.data()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}
