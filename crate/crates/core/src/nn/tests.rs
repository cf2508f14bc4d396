use rand::Rng;

use super::*;
use crate::error::Result;
use crate::rng::rng_from_seed;

const TOL: f64 = 1e-4;

fn random(shape: Vec<usize>, seed: u64) -> Tensor {
    let mut rng = rng_from_seed(seed);
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Squared distance to a fixed random target, so every output entry
/// contributes a distinct gradient.
fn probe(tape: &mut Tape, y: Var) -> Result<Var> {
    let shape = tape.value(y).shape().to_vec();
    let target = random(shape, 999);
    let mask = vec![true; target.len()];
    tape.masked_mse(y, &target, &mask)
}

fn check(report: GradCheckReport) {
    assert!(
        report.passes(TOL),
        "max rel err {} at {:?}",
        report.max_rel_error,
        report.worst
    );
}

#[test]
fn matmul_values_and_gradient() {
    let mut t = Tape::new();
    let i3 = t.constant(Tensor::new(vec![3, 3], vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]).unwrap());
    let m = random(vec![3, 2], 1);
    let mv = t.constant(m.clone());
    let p = t.matmul(i3, mv).unwrap();
    assert_eq!(t.value(p), &m);

    // ∂ sum(A·B)/∂A = 1·Bᵀ
    let mut t = Tape::new();
    let a = t.leaf(random(vec![2, 3], 2));
    let b = random(vec![3, 4], 3);
    let bv = t.constant(b.clone());
    let p = t.matmul(a, bv).unwrap();
    let s = t.sum(p);
    let g = t.backward(s).unwrap();
    let ga = g.get(a).unwrap();
    for r in 0..2 {
        for c in 0..3 {
            let want: f64 = b.row(c).iter().sum();
            assert!((ga.data()[r * 3 + c] - want).abs() < 1e-14);
        }
    }
}

#[test]
fn matmul_shape_error_names_shapes() {
    let mut t = Tape::new();
    let a = t.constant(random(vec![2, 3], 1));
    let b = t.constant(random(vec![2, 3], 2));
    let err = t.matmul(a, b).unwrap_err().to_string();
    assert!(err.contains("[2, 3]"), "{err}");
}

#[test]
fn gradcheck_matmul_shared_and_batched() {
    check(
        gradient_check(
            |t, v| {
                let y = t.matmul(v[0], v[1])?;
                probe(t, y)
            },
            &[random(vec![2, 3, 4], 1), random(vec![4, 5], 2)],
        )
        .unwrap(),
    );
    check(
        gradient_check(
            |t, v| {
                let y = t.matmul(v[0], v[1])?;
                probe(t, y)
            },
            &[random(vec![2, 3, 4], 3), random(vec![2, 4, 2], 4)],
        )
        .unwrap(),
    );
}

#[test]
fn linear_gradcheck_is_tight() {
    let r = gradient_check(
        |t, v| {
            let y = t.linear(v[0], v[1], Some(v[2]))?;
            probe(t, y)
        },
        &[random(vec![4, 3], 1), random(vec![3, 5], 2), random(vec![5], 3)],
    )
    .unwrap();
    assert!(r.passes(1e-6), "{r:?}");
}

#[test]
fn gradcheck_elementwise_ops() {
    let x = random(vec![3, 4], 5);
    check(
        gradient_check(
            |t, v| {
                let y = t.add(v[0], v[1])?;
                probe(t, y)
            },
            &[x.clone(), random(vec![3, 4], 6)],
        )
        .unwrap(),
    );
    check(
        gradient_check(
            |t, v| {
                let y = t.scale(v[0], -1.7);
                probe(t, y)
            },
            &[x.clone()],
        )
        .unwrap(),
    );
    check(
        gradient_check(
            |t, v| {
                let y = t.sigmoid(v[0]);
                probe(t, y)
            },
            &[x.clone()],
        )
        .unwrap(),
    );
    check(
        gradient_check(
            |t, v| {
                let y = t.relu(v[0]);
                probe(t, y)
            },
            &[x.clone()],
        )
        .unwrap(),
    );
    check(gradient_check(|t, v| Ok(t.mean(v[0])), &[x.clone()]).unwrap());
    check(gradient_check(|t, v| Ok(t.sum(v[0])), &[x]).unwrap());
}

#[test]
fn gradcheck_layer_norm() {
    check(
        gradient_check(
            |t, v| {
                let y = t.layer_norm(v[0], v[1], v[2])?;
                probe(t, y)
            },
            &[random(vec![3, 6], 1), random(vec![6], 2), random(vec![6], 3)],
        )
        .unwrap(),
    );
}

#[test]
fn layer_norm_contract() {
    let mut t = Tape::new();
    let x = t.constant(Tensor::full(vec![2, 4], 3.0).unwrap());
    let g = t.constant(Tensor::full(vec![4], 1.0).unwrap());
    let b = t.constant(Tensor::zeros(vec![4]).unwrap());
    let y = t.layer_norm(x, g, b).unwrap();
    assert!(t.value(y).data().iter().all(|v| *v == 0.0));

    let x = t.constant(random(vec![5, 16], 7));
    let y = t.layer_norm(x, g, b);
    assert!(y.is_err(), "gain of length 4 against rows of 16");
    let g = t.constant(Tensor::full(vec![16], 1.0).unwrap());
    let b = t.constant(Tensor::zeros(vec![16]).unwrap());
    let y = t.layer_norm(x, g, b).unwrap();
    for row in t.value(y).data().chunks(16) {
        let mean = row.iter().sum::<f64>() / 16.0;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 16.0;
        assert!(mean.abs() < 1e-6);
        // Epsilon shifts the variance slightly below one.
        assert!((var.sqrt() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn gradcheck_softmax_masked() {
    let mask = [true, false, true, true];
    check(
        gradient_check(
            |t, v| {
                let y = t.softmax(v[0], Some(&mask))?;
                probe(t, y)
            },
            &[random(vec![3, 4], 2)],
        )
        .unwrap(),
    );
    check(
        gradient_check(
            |t, v| {
                let y = t.softmax(v[0], None)?;
                probe(t, y)
            },
            &[random(vec![2, 5], 3)],
        )
        .unwrap(),
    );
}

#[test]
fn softmax_rows_sum_to_one_and_degenerate_rows_are_flagged() {
    let mut t = Tape::new();
    let x = t.constant(random(vec![6, 5], 4));
    let mask: Vec<bool> = (0..30).map(|i| i % 3 != 0).collect();
    let y = t.softmax(x, Some(&mask)).unwrap();
    for (r, row) in t.value(y).data().chunks(5).enumerate() {
        let s: f64 = row.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
        for (c, v) in row.iter().enumerate() {
            if !mask[r * 5 + c] {
                assert_eq!(*v, 0.0);
            }
        }
    }
    assert_eq!(t.degenerate_rows(), 0);
    let _ = t.softmax(x, Some(&[false; 5])).unwrap();
    assert_eq!(t.degenerate_rows(), 6);
}

fn attn_shape(batch: usize, q_len: usize, kv_len: usize, causal: bool) -> AttnShape {
    AttnShape {
        batch,
        q_len,
        kv_len,
        width: 8,
        heads: 2,
        causal,
    }
}

#[test]
fn gradcheck_attention_kernel() {
    for causal in [false, true] {
        let s = attn_shape(2, 3, 3, causal);
        check(
            gradient_check(
                |t, v| {
                    let y = t.attention(v[0], v[1], v[2], s)?;
                    probe(t, y)
                },
                &[random(vec![6, 8], 1), random(vec![6, 8], 2), random(vec![6, 8], 3)],
            )
            .unwrap(),
        );
    }
    let cross = attn_shape(1, 2, 5, false);
    check(
        gradient_check(
            |t, v| {
                let y = t.attention(v[0], v[1], v[2], cross)?;
                probe(t, y)
            },
            &[random(vec![2, 8], 4), random(vec![5, 8], 5), random(vec![5, 8], 6)],
        )
        .unwrap(),
    );
}

fn mha_store(seed: u64) -> (ParamStore, MultiHeadAttention) {
    let mut store = ParamStore::new();
    let mut rng = rng_from_seed(seed);
    let mha = MultiHeadAttention::new(&mut store, "mha", 8, 2, &mut rng).unwrap();
    (store, mha)
}

#[test]
fn mha_rejects_indivisible_width() {
    let mut store = ParamStore::new();
    assert!(MultiHeadAttention::new(&mut store, "m", 10, 4, &mut rng_from_seed(0)).is_err());
}

#[test]
fn mha_single_position_passes_value_through() {
    let (store, mha) = mha_store(1);
    let x = random(vec![1, 8], 2);
    let mut t = Tape::with_params(&store);
    let xv = t.constant(x.clone());
    let y = mha.forward(&mut t, xv, xv, 1, false).unwrap();
    let expect = mha.o.apply(&store, &mha.v.apply(&store, x.data(), 1), 1);
    for (a, b) in t.value(y).data().iter().zip(&expect) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn mha_full_jacobian_gradcheck() {
    let (store, mha) = mha_store(3);
    // Input and parameters are both checked: the input rides along as a
    // trailing "parameter".
    let mut store = store;
    let x = store.add("x", random(vec![3, 8], 4));
    for causal in [false, true] {
        let report = gradient_check_params(
            &store,
            |t| {
                let xv = t.param(x);
                let y = mha.forward(t, xv, xv, 1, causal)?;
                probe(t, y)
            },
            1,
        )
        .unwrap();
        check(report);
    }
}

#[test]
fn causal_mask_blocks_future_rows_exactly() {
    for seed in 0..5 {
        let (store, mha) = mha_store(seed);
        let x = random(vec![4, 8], 100 + seed);
        let run = |x: &Tensor| {
            let mut t = Tape::with_params(&store);
            let xv = t.constant(x.clone());
            let y = mha.forward(&mut t, xv, xv, 1, true).unwrap();
            t.value(y).clone()
        };
        let base = run(&x);
        for j in 1..4 {
            let mut xp = x.clone();
            xp.data_mut()[j * 8 + 3] += 0.731;
            let y = run(&xp);
            for i in 0..j {
                assert_eq!(y.row(i), base.row(i), "row {i} moved when row {j} changed");
            }
            assert_ne!(y.row(j), base.row(j));
        }

        // Tape gradients of output row i vanish exactly for inputs j > i.
        for i in 0..3 {
            let mut s2 = store.clone();
            let xid = s2.add("x", x.clone());
            let mut t2 = Tape::with_params(&s2);
            let xv2 = t2.param(xid);
            let y = mha.forward(&mut t2, xv2, xv2, 1, true).unwrap();
            let mut mask = vec![false; 32];
            mask[i * 8..(i + 1) * 8].iter_mut().for_each(|m| *m = true);
            let target = random(vec![4, 8], 5);
            let loss = t2.masked_mse(y, &target, &mask).unwrap();
            let g = t2.backward(loss).unwrap();
            let gx = g.param(xid).unwrap();
            for j in i + 1..4 {
                assert!(gx.row(j).iter().all(|v| *v == 0.0));
            }
        }
    }
}

#[test]
fn mlp_zero_weights_and_relu_gradient() {
    let mut store = ParamStore::new();
    let mlp = Mlp::new(&mut store, "mlp", 4, 16, &mut rng_from_seed(1)).unwrap();
    let mut zeroed = store.clone();
    for t in zeroed.tensors_mut() {
        t.data_mut().fill(0.0);
    }
    let x = random(vec![3, 4], 2);
    assert!(mlp.apply(&zeroed, x.data(), 3).iter().all(|v| *v == 0.0));

    check(
        gradient_check_params(
            &{
                let mut s = store.clone();
                s.add("x", x.clone());
                s
            },
            |t| {
                let xv = t.param(ParamId(store.len()));
                let y = mlp.forward(t, xv)?;
                probe(t, y)
            },
            1,
        )
        .unwrap(),
    );

    // Negative pre-activations pass no gradient to the up-projection bias.
    let mut t = Tape::new();
    let h = t.leaf(Tensor::new(vec![1, 4], vec![-1.0, 2.0, -0.5, 0.3]).unwrap());
    let r = t.relu(h);
    let s = t.sum(r);
    let g = t.backward(s).unwrap();
    assert_eq!(g.get(h).unwrap().data(), &[0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn corrupted_gradient_fails_the_check() {
    let inputs = [random(vec![3, 4], 1), random(vec![4, 2], 2)];
    let build = |t: &mut Tape, v: &[Var]| -> Result<Var> {
        let y = t.matmul(v[0], v[1])?;
        probe(t, y)
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|x| tape.leaf(x.clone())).collect();
    let loss = build(&mut tape, &vars).unwrap();
    let g = tape.backward(loss).unwrap();
    let mut analytic: Vec<Tensor> = vars.iter().map(|v| g.get(*v).unwrap().clone()).collect();
    analytic[1].data_mut()[3] *= 1.01;
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let mut t = Tape::new();
        let vs: Vec<Var> = xs.iter().map(|x| t.constant(x.clone())).collect();
        let l = build(&mut t, &vs)?;
        Ok(t.value(l).data()[0])
    };
    let report = compare_with_finite_differences(eval, &inputs, &analytic, FD_STEP, 1).unwrap();
    assert!(!report.passes(TOL));
    assert_eq!(report.worst, Some((1, 3)));
}

#[test]
fn backward_requires_scalar() {
    let mut t = Tape::new();
    let x = t.leaf(random(vec![2, 2], 1));
    assert!(t.backward(x).is_err());
}
