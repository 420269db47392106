//! Figure-reproduction run documents, compiled into the binary.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.conf")),
    ("fig1b", include_str!("../presets/fig1b.conf")),
    ("fig2a", include_str!("../presets/fig2a.conf")),
    ("fig2b", include_str!("../presets/fig2b.conf")),
    ("fig2c", include_str!("../presets/fig2c.conf")),
    ("fig3a", include_str!("../presets/fig3a.conf")),
    ("fig3b", include_str!("../presets/fig3b.conf")),
    ("fig5", include_str!("../presets/fig5.conf")),
    ("fig6", include_str!("../presets/fig6.conf")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> String {
    PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use nonbloch::config::{ConfigDoc, ModelSpec};

    #[test]
    fn every_preset_is_complete_and_explicit() {
        for (name, text) in PRESETS {
            let cfg = RunConfig::from_doc(ConfigDoc::parse(text).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!cfg.run.is_empty(), "{name} runs nothing");
            match cfg.model {
                ModelSpec::Example(p) => assert_eq!((p.mass, p.t0, p.t), (2.0, 0.4, 1.0), "{name}"),
                ModelSpec::Explicit(_) => panic!("{name} should use the example lattice"),
            }
        }
    }

    #[test]
    fn unknown_names_are_not_found() {
        assert!(lookup("fig4").is_none());
        assert!(lookup("fig2c").is_some());
        assert!(names().starts_with("fig1, fig1b"));
    }
}
