use std::sync::Mutex;

/// Side channel for non-fatal problems found during translation or
/// execution. Warnings never change results.
#[derive(Debug, Default)]
pub struct Diagnostics {
    warnings: Mutex<Vec<String>>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn warn(&self, message: impl Into<String>) {
        let message = message.into();
        log::debug!("{message}");
        self.warnings
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(message);
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn is_empty(&self) -> bool {
        self.warnings
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .is_empty()
    }
}
