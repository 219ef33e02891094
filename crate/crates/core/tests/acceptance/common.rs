/// Fails with `what` unless `actual` is within relative `tol` of `expected`
/// (absolute `tol` when `expected` is zero).
pub fn close(what: &str, actual: f64, expected: f64, tol: f64) -> Result<(), String> {
    let scale = if expected == 0.0 { 1.0 } else { expected.abs() };
    if (actual - expected).abs() <= tol * scale {
        Ok(())
    } else {
        Err(format!("{what}: got {actual}, oracle {expected}"))
    }
}

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}
