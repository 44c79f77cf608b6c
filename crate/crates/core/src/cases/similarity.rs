use std::sync::Arc;

/// Ratcliff/Obershelp similarity `2M / T`, where `M` is the total length of
/// the matching blocks found by recursively taking the longest common
/// substring and `T` is the combined length. Two empty strings are
/// identical (1.0).
pub fn similarity_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * matching_chars(&a, &b) as f64 / total as f64
}

fn matching_chars(a: &[char], b: &[char]) -> usize {
    let mut matched = 0;
    let mut pending = vec![(0, a.len(), 0, b.len())];
    while let Some((alo, ahi, blo, bhi)) = pending.pop() {
        let (i, j, k) = longest_match(a, b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        matched += k;
        if alo < i && blo < j {
            pending.push((alo, i, blo, j));
        }
        if i + k < ahi && j + k < bhi {
            pending.push((i + k, ahi, j + k, bhi));
        }
    }
    matched
}

/// Longest common substring of `a[alo..ahi]` and `b[blo..bhi]`; among equal
/// lengths the one starting earliest in `a`, then earliest in `b`.
fn longest_match(a: &[char], b: &[char], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let (mut best_i, mut best_j, mut best_k) = (alo, blo, 0);
    // run[j] is the length of the common suffix ending at a[i-1], b[j-1].
    let mut prev = vec![0usize; bhi - blo + 1];
    let mut cur = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        for j in blo..bhi {
            let c = j - blo + 1;
            cur[c] = if a[i] == b[j] { prev[c - 1] + 1 } else { 0 };
            let k = cur[c];
            if k > best_k {
                best_k = k;
                best_i = i + 1 - k;
                best_j = j + 1 - k;
            } else if k == best_k && k > 0 && (i + 1 - k, j + 1 - k) < (best_i, best_j) {
                best_i = i + 1 - k;
                best_j = j + 1 - k;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (best_i, best_j, best_k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySpec {
    pub expected_message: String,
    pub threshold: f64,
}

impl SimilaritySpec {
    pub const DEFAULT_THRESHOLD: f64 = 0.8;

    pub fn new(expected_message: impl Into<String>) -> Self {
        SimilaritySpec {
            expected_message: expected_message.into(),
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }

    pub fn matches(&self, observed: &str) -> bool {
        observed == self.expected_message
            || similarity_ratio(observed, &self.expected_message) >= self.threshold
    }
}

/// A predicate over observed error messages: exact match, or similarity at
/// or above the threshold.
pub fn crash_oracle(spec: SimilaritySpec) -> Arc<dyn Fn(&str) -> bool + Send + Sync> {
    Arc::new(move |observed| spec.matches(observed))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Expected values below were produced by an independent
    // SequenceMatcher implementation with junk heuristics disabled.
    #[test]
    fn reference_ratios() {
        assert_eq!(similarity_ratio("abcd", "bcde"), 0.75);
        assert_eq!(similarity_ratio("abc", "abc"), 1.0);
        assert_eq!(similarity_ratio("a", ""), 0.0);
        assert_eq!(similarity_ratio("", ""), 1.0);
        assert_eq!(similarity_ratio("kitten", "sitting"), 8.0 / 13.0);
        assert_eq!(similarity_ratio("abxcd", "abcd"), 8.0 / 9.0);
        assert_eq!(
            similarity_ratio("private Thread currentThread;", "private volatile Thread currentThread;"),
            58.0 / 67.0
        );
    }

    #[test]
    fn ratio_is_symmetric_on_reference_pairs() {
        for (a, b) in [("abcd", "bcde"), ("kitten", "sitting"), ("abxcd", "abcd")] {
            assert_eq!(similarity_ratio(a, b), similarity_ratio(b, a));
        }
    }

    #[test]
    fn threshold_is_inclusive() {
        let at = |n: usize| {
            let a = format!("{}{}", "x".repeat(n), "y".repeat(100 - n));
            let b = format!("{}{}", "x".repeat(n), "z".repeat(100 - n));
            (a, b)
        };
        let (a, b) = at(80);
        assert_eq!(similarity_ratio(&a, &b), 0.8);
        assert!(crash_oracle(SimilaritySpec::new(a.clone()))(&b));
        let (a, b) = at(79);
        assert_eq!(similarity_ratio(&a, &b), 0.79);
        assert!(!crash_oracle(SimilaritySpec::new(a))(&b));
    }

    #[test]
    fn exact_message_always_matches() {
        let spec = SimilaritySpec {
            expected_message: "boom".into(),
            threshold: 1.0,
        };
        assert!(spec.matches("boom"));
        assert!(!spec.matches("bang"));
    }
}
