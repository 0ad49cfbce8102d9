//! Build small ReLU networks by hand and combine them with the composition
//! operators, checking each result against nested evaluation.

use dnnclass::net::{clamp_output, concat, masking_network, pad_depth, stack, Affine, ReluNetwork};

fn main() -> dnnclass::Result<()> {
    // |x| = σ(x) + σ(−x)
    let abs = ReluNetwork::new(vec![
        Affine::from_rows(&[vec![1.0], vec![-1.0]], vec![0.0, 0.0])?,
        Affine::from_rows(&[vec![1.0, 1.0]], vec![0.0])?,
    ])?;
    // x ↦ 2x − 1
    let scale = ReluNetwork::affine(Affine::from_rows(&[vec![2.0]], vec![-1.0])?);

    let composed = stack(&abs, &scale)?; // |2x − 1|
    println!("stack: depth {} nnz {}", composed.depth(), composed.nnz());
    for x in [0.0, 0.25, 0.9] {
        println!("  |2·{x} − 1| = {}", composed.evaluate(&[x])?[0]);
    }

    let identity = pad_depth(&ReluNetwork::identity(1), composed.depth())?;
    let both = concat(&composed, &identity)?;
    println!(
        "concat: x=0.3 ↦ {:?}, nnz {} = {} + {}",
        both.evaluate(&[0.3])?,
        both.nnz(),
        composed.nnz(),
        identity.nnz()
    );

    let mask = masking_network(3, &[0, 2], 4)?;
    println!(
        "masking: {:?} ↦ {:?}, nnz {}",
        [1.0, 2.0, 3.0],
        mask.evaluate(&[1.0, 2.0, 3.0])?,
        mask.nnz()
    );

    let clamped = clamp_output(&scale, 0.5)?;
    println!(
        "clamp to ±0.5: x=0.9 ↦ {}, x=0.6 ↦ {}",
        clamped.evaluate(&[0.9])?[0],
        clamped.evaluate(&[0.6])?[0]
    );

    println!("json: {}", composed.to_json()?);
    Ok(())
}
