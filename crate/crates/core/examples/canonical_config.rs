//! Prints the canonical crossing scenario as JSON, e.g. to refresh
//! `configs/canonical.json`.

fn main() -> neuronav::Result<()> {
    let config = neuronav::sim::ScenarioConfig::canonical();
    println!("{}", serde_json::to_string_pretty(&config)?);
    Ok(())
}
