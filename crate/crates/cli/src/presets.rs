//! Configs bundled into the binary.

pub const PRESETS: &[(&str, &str)] = &[
    ("calibrate", include_str!("../presets/calibrate.json")),
    ("fig2b", include_str!("../presets/fig2b.json")),
    ("fig2c", include_str!("../presets/fig2c.json")),
    ("fig2d", include_str!("../presets/fig2d.json")),
    ("fig2e", include_str!("../presets/fig2e.json")),
    ("fig3b", include_str!("../presets/fig3b.json")),
    ("fig3c", include_str!("../presets/fig3c.json")),
    ("fig3d", include_str!("../presets/fig3d.json")),
    ("fig3f", include_str!("../presets/fig3f.json")),
    ("fig3g", include_str!("../presets/fig3g.json")),
    ("fig3h", include_str!("../presets/fig3h.json")),
    ("fig4b", include_str!("../presets/fig4b.json")),
    ("fig4c", include_str!("../presets/fig4c.json")),
    ("fig4d", include_str!("../presets/fig4d.json")),
    ("figS10", include_str!("../presets/figS10.json")),
    ("figS11", include_str!("../presets/figS11.json")),
    ("figS5", include_str!("../presets/figS5.json")),
    ("figS6", include_str!("../presets/figS6.json")),
    ("figS7", include_str!("../presets/figS7.json")),
    ("figS8", include_str!("../presets/figS8.json")),
    ("figS9", include_str!("../presets/figS9.json")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// The `description` field of a preset.
pub fn description(text: &str) -> String {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("description").and_then(|d| d.as_str()).map(str::to_string))
        .unwrap_or_default()
}
