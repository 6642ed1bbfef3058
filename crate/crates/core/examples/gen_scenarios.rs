//! Regenerates the `scenarios/` and `configs/` directories at the workspace root.

use std::fs;
use std::path::Path;

use hybrid_astar::scenarios::bundled;

const CONFIGS: [(&str, &str, &str); 10] = [
    ("known_large_standard", "known_large", "standard"),
    ("known_large_guided", "known_large", "guided"),
    ("unknown_large_standard", "unknown_large", "standard"),
    ("unknown_large_guided", "unknown_large", "guided"),
    ("plate_8_4_standard", "plate_8_4", "standard"),
    ("plate_8_4_extended", "plate_8_4", "extended"),
    ("plate_6_7_standard", "plate_6_7", "standard"),
    ("plate_6_7_extended", "plate_6_7", "extended"),
    ("divergence_guided", "divergence", "guided"),
    ("divergence_guided_extended", "divergence", "guided+extended"),
];

fn main() -> std::io::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let scenarios = root.join("scenarios");
    let configs = root.join("configs");
    fs::create_dir_all(&scenarios)?;
    fs::create_dir_all(&configs)?;
    for b in bundled() {
        fs::write(scenarios.join(&b.file.map), b.map.to_map_string())?;
        let mut json = serde_json::to_string_pretty(&b.file).expect("scenario serializes");
        json.push('\n');
        fs::write(scenarios.join(format!("{}.scenario", b.name)), json)?;
    }
    for (name, scenario, mode) in CONFIGS {
        let json = format!(
            "{{\n  \"scenario_path\": \"../scenarios/{scenario}.scenario\",\n  \"mode\": \"{mode}\",\n  \"output_dir\": \"../out/{name}\"\n}}\n"
        );
        fs::write(configs.join(format!("{name}.json")), json)?;
    }
    Ok(())
}
