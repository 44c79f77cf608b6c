//! Zeller and Hildebrandt's ddmin over an ordered set of items.

/// Outcome of testing a candidate subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<T> {
    Fail,
    /// The candidate holds. Carries the items actually kept, which may be a
    /// subset of the candidate when the test removed more than asked.
    Pass(Vec<T>),
}

/// The test asked the search to stop (e.g. on timeout).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interrupted;

/// Minimizes `items` under `test`, which receives the subset to keep.
///
/// Subsets and complements of an `n`-way partition are tried in document
/// order; granularity starts at 2, resets to 2 after a subset succeeds,
/// drops by one after a complement succeeds, and doubles when nothing
/// succeeds. A single remaining item is tested for removal as well. The
/// result is 1-minimal: removing any one of its items fails.
///
/// Returns the final items and whether the search was interrupted.
pub fn ddmin<T: Clone + PartialEq>(
    items: Vec<T>,
    mut test: impl FnMut(&[T]) -> Result<Verdict<T>, Interrupted>,
) -> (Vec<T>, bool) {
    let mut c = items;
    let mut n = 2usize;
    loop {
        match c.len() {
            0 => return (c, false),
            1 => {
                return match test(&[]) {
                    Ok(Verdict::Pass(kept)) => (kept, false),
                    Ok(Verdict::Fail) => (c, false),
                    Err(Interrupted) => (c, true),
                }
            }
            _ => {}
        }
        let parts = n.min(c.len());
        let bounds: Vec<(usize, usize)> = (0..parts)
            .map(|i| (i * c.len() / parts, (i + 1) * c.len() / parts))
            .collect();
        let mut next = None;
        for &(lo, hi) in &bounds {
            match test(&c[lo..hi]) {
                Ok(Verdict::Pass(kept)) => {
                    next = Some((kept, 2));
                    break;
                }
                Ok(Verdict::Fail) => {}
                Err(Interrupted) => return (c, true),
            }
        }
        if next.is_none() && parts > 2 {
            for &(lo, hi) in &bounds {
                let complement: Vec<T> = c[..lo].iter().chain(&c[hi..]).cloned().collect();
                match test(&complement) {
                    Ok(Verdict::Pass(kept)) => {
                        next = Some((kept, (parts - 1).max(2)));
                        break;
                    }
                    Ok(Verdict::Fail) => {}
                    Err(Interrupted) => return (c, true),
                }
            }
        }
        match next {
            Some((kept, granularity)) => {
                c = kept;
                n = granularity;
            }
            None if parts >= c.len() => return (c, false),
            None => n = (2 * parts).min(c.len()),
        }
    }
}
