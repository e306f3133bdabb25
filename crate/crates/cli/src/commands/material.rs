//! `sfg material`: evaluate the dispersion model for a wavelength triple.

use std::path::Path;
use std::sync::Arc;

use sfg_core::materials::{
    idler_wavelength, primary_phase_mismatch, wavenumber, MaterialModel, OpticalSetup,
};

use crate::CliError;

pub fn run(
    material_file: &Path,
    lambda1_um: f64,
    lambda2_um: f64,
    temperature_c: f64,
) -> Result<(), CliError> {
    let material = Arc::new(MaterialModel::from_json_file(material_file)?);
    // chi2 and pump intensity do not enter the index chain; placeholders
    let setup = OpticalSetup::new(lambda1_um, lambda2_um, temperature_c, 0.0, 1.0, material)?;
    let m = &setup.material;

    println!("material: {}", m.name);
    println!("source:   {}", m.source);
    println!("T = {temperature_c} C");
    println!(
        "{:<8} {:>14} {:>18} {:>16} {:>18}",
        "wave", "lambda_um", "n", "delta_n", "k_per_mm"
    );
    for (label, lambda) in [
        ("signal", setup.lambda1_um),
        ("pump", setup.lambda2_um),
        ("idler", setup.lambda3_um),
    ] {
        let n = m.refractive_index(lambda, temperature_c)?;
        let dn = m.thermal_correction(lambda, temperature_c);
        let k = wavenumber(n, lambda)?;
        println!("{label:<8} {lambda:>14.9} {n:>18.12} {dn:>16.6e} {k:>18.9e}");
    }
    let dk0 = primary_phase_mismatch(&setup)?;
    println!("idler from energy conservation: lambda3_um = {:.12}", idler_wavelength(lambda1_um, lambda2_um)?);
    println!("delta_k0_per_mm = {dk0:.12e}");
    Ok(())
}
