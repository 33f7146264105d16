//! The Three-Box pre/post-selection paradox: projector weak values
//! (1, 1, -1), with the orthogonal-post-selection failure mode on display.

use num_complex::Complex64;
use pilotwave::weakvalue::{three_box_experiment, weak_value, KetVector, Observable};

use crate::config::ThreeBoxConfig;
use crate::manifest::RunRecorder;
use crate::CliError;

pub fn run(_cfg: &ThreeBoxConfig, rec: &mut RunRecorder) -> Result<(), CliError> {
    let reports = three_box_experiment().map_err(CliError::run)?;
    let labels = ["P_A", "P_B", "P_C"];
    let expected = [1.0, 1.0, -1.0];

    let sum: Complex64 = reports.iter().map(|r| r.weak_value).sum();
    let mut worst = (sum - Complex64::ONE).norm();
    for (r, e) in reports.iter().zip(expected) {
        worst = worst.max((r.weak_value - Complex64::new(e, 0.0)).norm());
    }

    // the documented failure: post-selecting orthogonally to the evolved
    // preparation leaves the weak value undefined
    let psi_i = KetVector::from_reals(&[1.0, 1.0, 1.0]).unwrap();
    let mut amps = vec![Complex64::ZERO; 3];
    amps[0] = Complex64::new(1.0, 0.0);
    amps[1] = Complex64::new(-1.0, 0.0);
    let orthogonal = KetVector::new(amps).unwrap();
    let demo_err = weak_value(&psi_i, &orthogonal, &Observable::basis_projector(3, 2), None)
        .expect_err("orthogonal post-selection must be rejected");

    let json = serde_json::json!({
        "boxes": labels
            .iter()
            .zip(reports.iter())
            .map(|(l, r)| serde_json::json!({"projector": l, "report": r.to_json()}))
            .collect::<Vec<_>>(),
        "sum_rule": {"re": sum.re, "im": sum.im},
        "orthogonal_postselection_error": demo_err.to_string(),
    });
    serde_json::to_writer_pretty(rec.create("three_box.json")?, &json)
        .map_err(std::io::Error::other)?;

    rec.check(
        "weak values are (1, 1, -1) and sum to 1, within 1e-12",
        worst <= 1e-12,
        format!("max deviation {worst:.2e}"),
    );
    rec.check(
        "orthogonal post-selection raises the documented error",
        demo_err.to_string().contains("orthogonal"),
        demo_err.to_string(),
    );
    Ok(())
}
