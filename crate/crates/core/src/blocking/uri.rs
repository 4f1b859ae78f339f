//! Prefix/infix/suffix decomposition of URIs.
//!
//! URIs are grouped by their domain token. Within a group the prefix of a
//! URI is the '/'-aligned leading part followed by the largest number of
//! distinct next segments across the group; the suffix is found the same way
//! on the reversed remainder. Whatever lies between is the infix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::engine::{Executor, JobError, PartitionedDataset};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UriDecomposition {
    pub prefix: String,
    pub infix: String,
    pub suffix: Option<String>,
    /// The URI had no usable `scheme://authority/path` shape and was kept
    /// whole as the infix.
    pub fallback: bool,
}

impl UriDecomposition {
    fn whole(uri: &str) -> Self {
        Self {
            prefix: String::new(),
            infix: String::from(uri),
            suffix: None,
            fallback: true,
        }
    }

    pub fn reassemble(&self) -> String {
        let mut s = self.prefix.clone();
        s.push_str(&self.infix);
        if let Some(suffix) = &self.suffix {
            s.push_str(suffix);
        }
        s
    }
}

/// First token after the scheme, splitting on '/', ':', '.' and '#'; e.g.
/// `dbpedia` for `http://dbpedia.org/resource/Paris`.
pub fn domain_key(uri: &str) -> Option<&str> {
    let rest = &uri[uri.find("://")? + 3..];
    rest.split(['/', ':', '.', '#']).find(|t| !t.is_empty())
}

/// `scheme://authority` and the path segments after it, or `None` when the
/// URI has no path.
fn split_uri(uri: &str) -> Option<(&str, &str, Vec<&str>)> {
    let group = domain_key(uri)?;
    let after = uri.find("://")? + 3;
    let slash = after + uri[after..].find('/')?;
    let segments = uri[slash + 1..].split('/').collect();
    Some((group, &uri[..slash], segments))
}

fn join_prefix(base: &str, segments: &[&str]) -> String {
    let mut s = String::from(base);
    for seg in segments {
        s.push('/');
        s.push_str(seg);
    }
    s
}

fn suffix_of(segments: &[&str], len: usize) -> String {
    join_prefix("", &segments[segments.len() - len..])
}

/// Distinct-next-segment counts learned from a URI population.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixTable {
    prefixes: BTreeMap<String, usize>,
    /// Keyed by group and suffix; the empty suffix counts distinct last
    /// segments.
    suffixes: BTreeMap<(String, String), usize>,
}

fn count_distinct<E: Executor>(
    exec: &E,
    input: &PartitionedDataset<&str>,
    emit: impl Fn(&str) -> Vec<(Vec<u8>, String)> + Sync,
) -> Result<Vec<(Vec<u8>, usize)>, JobError> {
    exec.map_group_reduce(
        input,
        |uri| emit(uri),
        |key, next| {
            let distinct: BTreeSet<String> = next.into_iter().collect();
            alloc::vec![(key.to_vec(), distinct.len())]
        },
    )
}

fn suffix_key(group: &str, suffix: &str) -> Vec<u8> {
    let mut key = Vec::with_capacity(group.len() + suffix.len() + 1);
    key.extend_from_slice(group.as_bytes());
    key.push(0);
    key.extend_from_slice(suffix.as_bytes());
    key
}

impl PrefixTable {
    /// Two passes over the population: one scoring every candidate prefix,
    /// one scoring every candidate suffix of the prefix-stripped remainders.
    pub fn learn<E: Executor>(uris: &[&str], exec: &E) -> Result<Self, JobError> {
        let input = PartitionedDataset::split(uris.to_vec(), exec.config().partitions)?;
        let prefixes = count_distinct(exec, &input, |uri| {
            let Some((_, base, segs)) = split_uri(uri) else {
                return Vec::new();
            };
            (0..segs.len())
                .map(|k| {
                    (
                        join_prefix(base, &segs[..k]).into_bytes(),
                        String::from(segs[k]),
                    )
                })
                .collect()
        })?;
        let mut table = Self {
            prefixes: prefixes
                .into_iter()
                .map(|(k, n)| (String::from_utf8_lossy(&k).into_owned(), n))
                .collect(),
            suffixes: BTreeMap::new(),
        };
        let suffixes = count_distinct(exec, &input, |uri| {
            let Some((group, base, segs)) = split_uri(uri) else {
                return Vec::new();
            };
            let rest = &segs[table.prefix_len(base, &segs)..];
            (0..rest.len())
                .map(|j| {
                    let prev = rest[rest.len() - 1 - j];
                    (suffix_key(group, &suffix_of(rest, j)), String::from(prev))
                })
                .collect()
        })?;
        for (key, n) in suffixes {
            let split = key.iter().position(|&b| b == 0).unwrap_or(key.len());
            let group = String::from_utf8_lossy(&key[..split]).into_owned();
            let suffix = String::from_utf8_lossy(&key[(split + 1).min(key.len())..]).into_owned();
            table.suffixes.insert((group, suffix), n);
        }
        Ok(table)
    }

    /// Number of path segments in the best prefix; ties go to the longest,
    /// so a URI alone in its group keeps only its last segment as infix.
    fn prefix_len(&self, base: &str, segs: &[&str]) -> usize {
        let mut best = (0, 0);
        for k in 0..segs.len() {
            let score = self
                .prefixes
                .get(&join_prefix(base, &segs[..k]))
                .copied()
                .unwrap_or(0);
            if score >= best.1 {
                best = (k, score);
            }
        }
        best.0
    }

    /// Number of trailing segments in the best suffix; ties go to the
    /// shortest, so zero means no suffix.
    fn suffix_len(&self, group: &str, rest: &[&str]) -> usize {
        let mut best = (0, 0);
        for j in 0..rest.len() {
            let key = (String::from(group), suffix_of(rest, j));
            let score = self.suffixes.get(&key).copied().unwrap_or(0);
            if score > best.1 {
                best = (j, score);
            }
        }
        best.0
    }

    pub fn decompose(&self, uri: &str) -> UriDecomposition {
        let Some((group, base, segs)) = split_uri(uri) else {
            return UriDecomposition::whole(uri);
        };
        let k = self.prefix_len(base, &segs);
        let rest = &segs[k..];
        let j = self.suffix_len(group, rest);
        let prefix = join_prefix(base, &segs[..k]);
        let infix = join_prefix("", &rest[..rest.len() - j]);
        let suffix = (j > 0).then(|| suffix_of(rest, j));
        UriDecomposition {
            prefix,
            infix,
            suffix,
            fallback: false,
        }
    }
}

pub fn decompose_uri(uri: &str, table: &PrefixTable) -> UriDecomposition {
    table.decompose(uri)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SequentialExecutor;
    use alloc::format;

    fn learn(uris: &[&str]) -> PrefixTable {
        PrefixTable::learn(uris, &SequentialExecutor::default()).unwrap()
    }

    #[test]
    fn domain_keys() {
        assert_eq!(
            domain_key("http://dbpedia.org/resource/Paris"),
            Some("dbpedia")
        );
        assert_eq!(domain_key("http://liris.cnrs.fr/x"), Some("liris"));
        assert_eq!(domain_key("urn:isbn:123"), None);
        assert_eq!(domain_key("12345"), None);
    }

    #[test]
    fn single_uri_keeps_host_as_prefix() {
        let table = learn(&["http://x.org/a"]);
        let d = table.decompose("http://x.org/a");
        assert_eq!(d.prefix, "http://x.org");
        assert_eq!(d.infix, "/a");
        assert_eq!(d.suffix, None);
        assert!(!d.fallback);
    }

    #[test]
    fn opaque_ids_fall_back() {
        let table = learn(&["12345"]);
        let d = table.decompose("12345");
        assert_eq!(d.infix, "12345");
        assert!(d.fallback);
        assert!(table.decompose("http://host.only").fallback);
    }

    #[test]
    fn shared_resource_path_is_prefix() {
        let uris = [
            "http://dbpedia.org/resource/Paris",
            "http://dbpedia.org/resource/Eiffel_Tower",
            "http://dbpedia.org/resource/Lyon",
        ];
        let table = learn(&uris);
        let d = table.decompose(uris[1]);
        assert_eq!(d.prefix, "http://dbpedia.org/resource");
        assert_eq!(d.infix, "/Eiffel_Tower");
        assert_eq!(d.suffix, None);
    }

    #[test]
    fn every_uri_reassembles() {
        let mut uris = alloc::vec::Vec::new();
        for i in 0..20 {
            uris.push(format!("http://a.b/{}/x/{}", i % 3, i));
            uris.push(format!("https://c.d/p/{i}/data.rdf#me"));
            uris.push(format!("http://e.f/{i}/"));
        }
        let refs: Vec<&str> = uris.iter().map(String::as_str).collect();
        let table = learn(&refs);
        for u in &refs {
            let d = table.decompose(u);
            assert_eq!(d.reassemble(), *u);
            assert!(!d.infix.is_empty());
        }
    }
}
