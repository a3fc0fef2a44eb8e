//! Parser for `mvn dependency:tree`-style plain-text dumps.

use super::error::IngestError;
use super::snapshot_doc::{NodeDoc, SnapshotDoc};

/// Options for tree-dump parsing.
#[derive(Debug, Clone, Default)]
pub struct TreeParseOptions {
    /// Dependency scopes to drop, subtree included (e.g. "test").
    pub omit_scopes: Vec<String>,
}

struct Line {
    number: usize,
    depth: usize,
    group: String,
    artifact: String,
    version: String,
    scope: Option<String>,
}

/// Parses a build-tool dependency tree dump into an unresolved snapshot
/// document (release dates are joined from metadata later).
///
/// The root line carries `group:artifact:packaging:version`; children are
/// indented with `+- ` / `\- ` markers and `|  ` continuation prefixes,
/// with coordinates `group:artifact:packaging:version:scope`.
pub fn parse_maven_tree(text: &str, opts: &TreeParseOptions) -> Result<SnapshotDoc, IngestError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let line = raw.strip_prefix("[INFO] ").unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        lines.push(parse_line(number, line)?);
    }
    if lines.is_empty() {
        return Err(IngestError::Parse {
            line: 0,
            message: "empty dependency tree dump".into(),
        });
    }
    if lines[0].depth != 0 {
        return Err(IngestError::Indentation {
            line: lines[0].number,
        });
    }

    // parent stack of (depth, path into the tree under construction)
    let mut root = NodeDoc::bare(&lines[0].group, &lines[0].artifact, &lines[0].version);
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    let mut skip_above: Option<usize> = None;

    for line in &lines[1..] {
        if line.depth == 0 {
            return Err(IngestError::Parse {
                line: line.number,
                message: "second root line in dump".into(),
            });
        }
        if let Some(skip_depth) = skip_above {
            if line.depth > skip_depth {
                continue;
            }
            skip_above = None;
        }
        while stack.last().map(|(d, _)| *d >= line.depth).unwrap_or(false) {
            stack.pop();
        }
        let (parent_depth, parent_path) = stack
            .last()
            .cloned()
            .ok_or(IngestError::Indentation { line: line.number })?;
        if line.depth != parent_depth + 1 {
            return Err(IngestError::Indentation { line: line.number });
        }
        if let Some(scope) = &line.scope {
            if opts.omit_scopes.iter().any(|s| s == scope) {
                skip_above = Some(line.depth);
                continue;
            }
        }
        let parent = root.node_at_mut(&parent_path);
        parent
            .dependencies
            .push(NodeDoc::bare(&line.group, &line.artifact, &line.version));
        let mut path = parent_path;
        path.push(parent.dependencies.len() - 1);
        stack.push((line.depth, path));
    }

    Ok(SnapshotDoc {
        observed_at: None,
        root,
    })
}

fn parse_line(number: usize, line: &str) -> Result<Line, IngestError> {
    let mut rest = line;
    let mut blocks = 0usize;
    loop {
        if rest.starts_with("+- ") || rest.starts_with("\\- ") {
            rest = &rest[3..];
            blocks += 1;
            break;
        }
        if rest.starts_with("|  ") || rest.starts_with("   ") {
            rest = &rest[3..];
            blocks += 1;
            continue;
        }
        break;
    }
    let depth = if blocks == 0 {
        0
    } else if line[(blocks - 1) * 3..].starts_with("+- ")
        || line[(blocks - 1) * 3..].starts_with("\\- ")
    {
        blocks
    } else {
        return Err(IngestError::Indentation { line: number });
    };

    // drop trailing annotations like "(version managed from 1.1)" or "(*)"
    let coords = match rest.find(" (") {
        Some(i) => &rest[..i],
        None => rest,
    }
    .trim_end();

    let parts: Vec<&str> = coords.split(':').collect();
    let (group, artifact, version, scope) = match parts.len() {
        3 => (parts[0], parts[1], parts[2], None),
        4 => (parts[0], parts[1], parts[3], None),
        5 => (parts[0], parts[1], parts[3], Some(parts[4])),
        6 => (parts[0], parts[1], parts[4], Some(parts[5])),
        _ => {
            return Err(IngestError::Parse {
                line: number,
                message: format!("malformed coordinates \"{coords}\""),
            })
        }
    };
    if group.is_empty() || artifact.is_empty() || version.is_empty() {
        return Err(IngestError::Parse {
            line: number,
            message: format!("empty coordinate component in \"{coords}\""),
        });
    }
    Ok(Line {
        number,
        depth,
        group: group.into(),
        artifact: artifact.into(),
        version: version.into(),
        scope: scope.map(String::from),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_valid_dump() {
        let text = "g:a:jar:1.0\n\\- g:b:jar:2.0:compile\n";
        let doc = parse_maven_tree(text, &TreeParseOptions::default()).unwrap();
        assert_eq!(doc.root.artifact, "a");
        assert_eq!(doc.root.dependencies.len(), 1);
        assert_eq!(doc.root.dependencies[0].artifact, "b");
    }

    #[test]
    fn nesting_follows_indentation() {
        let text = "\
g:a:jar:1.0
+- g:b:jar:1.0:compile
|  \\- g:c:jar:1.0:compile
\\- g:d:jar:1.0:compile
";
        let doc = parse_maven_tree(text, &TreeParseOptions::default()).unwrap();
        assert_eq!(doc.root.dependencies.len(), 2);
        assert_eq!(doc.root.dependencies[0].dependencies[0].artifact, "c");
        assert!(doc.root.dependencies[1].dependencies.is_empty());
    }

    #[test]
    fn omit_scope_drops_subtree() {
        let text = "\
g:a:jar:1.0
+- g:t:jar:1.0:test
|  \\- g:u:jar:1.0:test
\\- g:b:jar:1.0:compile
";
        let opts = TreeParseOptions {
            omit_scopes: vec!["test".into()],
        };
        let doc = parse_maven_tree(text, &opts).unwrap();
        assert_eq!(doc.root.dependencies.len(), 1);
        assert_eq!(doc.root.dependencies[0].artifact, "b");
    }

    #[test]
    fn malformed_coordinates_report_line() {
        let text = "g:a:jar:1.0\n\\- nonsense\n";
        let err = parse_maven_tree(text, &TreeParseOptions::default()).unwrap_err();
        match err {
            IngestError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn depth_jump_is_inconsistent_indentation() {
        let text = "g:a:jar:1.0\n|  |  \\- g:c:jar:1.0:compile\n";
        let err = parse_maven_tree(text, &TreeParseOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::Indentation { line: 2 }));
    }

    #[test]
    fn info_prefix_is_stripped() {
        let text = "[INFO] g:a:jar:1.0\n[INFO] \\- g:b:jar:2.0:compile\n";
        let doc = parse_maven_tree(text, &TreeParseOptions::default()).unwrap();
        assert_eq!(doc.root.dependencies.len(), 1);
    }
}
