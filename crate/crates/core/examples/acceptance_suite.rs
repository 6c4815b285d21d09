//! Runs the numbered acceptance checks with default settings.
use hjselect::verify::{VerifySettings, Verifier};

fn main() -> hjselect::Result<()> {
    let verifier = Verifier::new(VerifySettings::default())?;
    for claim in verifier.run_all() {
        println!("{}  [{:.2}s]", claim.summary_line(), claim.runtime.as_secs_f64());
    }
    Ok(())
}
