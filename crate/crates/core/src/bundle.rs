use alloc::string::String;
use alloc::vec::Vec;

use crate::module::LearningModule;

#[derive(Debug, Clone, PartialEq)]
pub struct BundleEntry {
    pub filename: String,
    pub module: LearningModule,
}

/// Ordered, non-empty sequence of modules presented one at a time.
///
/// Order is case-insensitive lexicographic by filename (ties broken by the
/// exact filename) so authors control the sequence with numeric prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    entries: Vec<BundleEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("a bundle needs at least one module")]
pub struct EmptyBundle;

impl Bundle {
    pub fn new(mut entries: Vec<BundleEntry>) -> Result<Self, EmptyBundle> {
        if entries.is_empty() {
            return Err(EmptyBundle);
        }
        entries.sort_by(|a, b| {
            presentation_key(&a.filename)
                .cmp(&presentation_key(&b.filename))
                .then_with(|| a.filename.cmp(&b.filename))
        });
        Ok(Bundle { entries })
    }

    pub fn from_modules(
        modules: impl IntoIterator<Item = (String, LearningModule)>,
    ) -> Result<Self, EmptyBundle> {
        Bundle::new(
            modules
                .into_iter()
                .map(|(filename, module)| BundleEntry { filename, module })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BundleEntry] {
        &self.entries
    }

    pub fn module(&self, index: usize) -> Option<&LearningModule> {
        self.entries.get(index).map(|e| &e.module)
    }

    pub fn modules(&self) -> impl Iterator<Item = &LearningModule> {
        self.entries.iter().map(|e| &e.module)
    }

    /// Modules carrying a question.
    pub fn question_count(&self) -> usize {
        self.modules().filter(|m| m.has_question()).count()
    }
}

pub fn presentation_key(filename: &str) -> String {
    filename.to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::new_template;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn order_is_case_insensitive() {
        let m = new_template(6).unwrap();
        let b = Bundle::from_modules(vec![
            ("b.json".to_string(), m.clone()),
            ("02_ring.json".to_string(), m.clone()),
            ("A.json".to_string(), m.clone()),
            ("01_intro.json".to_string(), m.clone()),
        ])
        .unwrap();
        let names: Vec<&str> = b.entries().iter().map(|e| e.filename.as_str()).collect();
        assert_eq!(names, ["01_intro.json", "02_ring.json", "A.json", "b.json"]);
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(Bundle::new(Vec::new()), Err(EmptyBundle));
    }
}
