//! Runs the whole desk-scale pipeline through the cached stage runner, then
//! runs it again to show every stage hit the cache. Takes tens of minutes on
//! one core.
//!
//! ```bash
//! cargo run --release --example desk_pipeline -- /tmp/desk
//! ```

use std::path::PathBuf;

use pias_workbench::workbench::{ExperimentConfig, Workbench};

fn main() -> pias_workbench::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("pias_desk"));
    let config = ExperimentConfig { output_dir: out.clone(), ..ExperimentConfig::desk_scale() };
    let bench = Workbench::new(config)?;
    for pass in 1..=2 {
        let t = std::time::Instant::now();
        for outcome in bench.pipeline()? {
            println!("pass {pass}: {:<9} {:?}", outcome.stage.as_str(), outcome.status);
        }
        println!("pass {pass}: {:.1}s\n", t.elapsed().as_secs_f64());
    }
    let heatmap = std::fs::read_to_string(out.join("evaluate/report/heatmap.csv")).map_err(|e| pias_workbench::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    println!("VBS-hit heatmap (%):\n{heatmap}");
    Ok(())
}
