//! Golden files for descriptor rewrites. Regenerate with `LEGSPHERE_BLESS=1`.

use std::path::PathBuf;

use legsphere::openbook::OpenBookDesc;

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("LEGSPHERE_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name} differs");
}

fn lines(v: &[OpenBookDesc], canonical: bool) -> String {
    v.iter().map(|d| if canonical { d.canonical_text() } else { d.to_string() } + "\n").collect()
}

#[test]
fn stabilize_golden() {
    let out: Vec<OpenBookDesc> = (1..=4).map(|n| OpenBookDesc::trivial(n).stabilize("L").unwrap()).collect();
    golden("stabilize.txt", &lines(&out, false));
    golden("stabilize_canonical.txt", &lines(&out, true));
}

#[test]
fn surgery_rewrite_golden() {
    let out: Vec<OpenBookDesc> = (1..=4).map(|n| OpenBookDesc::cotangent_sphere(n).surgery_rewrite("S").unwrap()).collect();
    golden("surgery.txt", &lines(&out, false));
    golden("surgery_canonical.txt", &lines(&out, true));
}

#[test]
fn chain_golden() {
    let start: OpenBookDesc = "n=2 page=D^{2n} handles=[] spheres=[] disks=[L:bp,M:bp,K:bp] meets=[L~M] word=[]"
        .parse()
        .unwrap();
    let a = start.stabilize("L").unwrap();
    let b = a.stabilize("M").unwrap();
    let c = b.stabilize("K").unwrap();
    let d = c.surgery_rewrite("S(L)").unwrap();
    let e = d.twist("S(L)", -1).unwrap();
    let steps = vec![start, a, b, c, d, e];
    golden("chain.txt", &lines(&steps, false));
    golden("chain_canonical.txt", &lines(&steps, true));
}

#[test]
fn golden_lines_parse_back() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for entry in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        for line in text.lines() {
            let d: OpenBookDesc = line.parse().unwrap_or_else(|e| panic!("{line}: {e}"));
            assert_eq!(d.to_string(), line);
        }
    }
}

#[test]
fn stabilized_trivial_is_the_cotangent_fixture() {
    for n in 1..=4 {
        let st = OpenBookDesc::trivial(n).stabilize("L").unwrap();
        assert!(st.equivalent(&OpenBookDesc::cotangent_sphere(n)));
        assert_eq!(st.canonical_text(), OpenBookDesc::cotangent_sphere(n).canonical_text());
    }
}
