//! Worker pool sizing.

/// Environment variable overriding the worker count.
pub const THREADS_VAR: &str = "SNC_THREADS";

/// Parses a `SNC_THREADS` value; `None` means "use all logical cores".
pub fn parse_threads(value: Option<&str>) -> Result<Option<usize>, String> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("{THREADS_VAR} must be a positive integer, got {v:?}")),
            Ok(n) => Ok(Some(n)),
        },
    }
}

/// Configures the global rayon pool from `SNC_THREADS`. Call once, before
/// any parallel work.
pub fn init_from_env() -> Result<(), String> {
    let value = std::env::var(THREADS_VAR).ok();
    if let Some(n) = parse_threads(value.as_deref())? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_thread_counts() {
        assert_eq!(parse_threads(None), Ok(None));
        assert_eq!(parse_threads(Some(" 4 ")), Ok(Some(4)));
        assert!(parse_threads(Some("0")).is_err());
        assert!(parse_threads(Some("many")).is_err());
    }
}
