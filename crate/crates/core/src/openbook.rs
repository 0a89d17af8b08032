//! Symbolic open books: pages as handle descriptors, monodromies as words in
//! signed Dehn twists, stabilisation and the surgery rewrite, relative open
//! books built from ball moves, and the local generalised Dehn twist on
//! `T*S^n`.
//!
//! Descriptors are immutable values. Every operation returns a new one.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grids::{random_cotangent, rng};
use crate::smooth::smoothstep;
use crate::vecops::{dist_inf, dot, norm, normalized, reject};
use crate::verifier::{curve_velocity, Report, Sample};

/// Page tag of the `2n`-ball.
pub const BALL: &str = "D^{2n}";
/// Page tag of the unit disk cotangent bundle of `S^n`.
pub const DISK_COTANGENT_SPHERE: &str = "D(T*S^n)";
/// Zero section of [`DISK_COTANGENT_SPHERE`].
pub const ZERO_SECTION: &str = "S";

const RESERVED: &[char] = &[',', '[', ']', '=', ':', '@', '~'];

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c)) {
        return Err(Error::Argument(format!("invalid label {label:?}")));
    }
    Ok(())
}

/// Label of the sphere `disk ∪ core` created by stabilising along `disk`.
pub fn stabilised_sphere(disk: &str) -> String {
    format!("S({disk})")
}

/// Attaching label of the handle added when stabilising along `disk`.
pub fn attaching_label(disk: &str) -> String {
    format!("d{disk}")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Handle {
    pub index: usize,
    /// Label of the attaching sphere.
    pub label: String,
}

/// A page: a base Liouville domain tag, attached handles, and the registry of
/// Lagrangian spheres available to the monodromy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageDesc {
    pub base: String,
    pub handles: Vec<Handle>,
    pub spheres: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Twist {
    pub sphere: String,
    /// `+1` for a positive twist, `-1` for its inverse.
    pub sign: i8,
}

impl Twist {
    pub fn positive(sphere: &str) -> Self {
        Self { sphere: sphere.to_string(), sign: 1 }
    }

    pub fn inverse(&self) -> Self {
        Self { sphere: self.sphere.clone(), sign: -self.sign }
    }
}

/// Monodromy as a word of twists, applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MonodromyWord {
    pub word: Vec<Twist>,
}

impl MonodromyWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self { word: self.word.iter().rev().map(Twist::inverse).collect() }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut word = self.word.clone();
        word.extend(other.word.iter().cloned());
        Self { word }
    }

    /// Normal form when twists about spheres that `commute` commute and no
    /// other relations hold. First cancel every pair `x ... x^-1` whose
    /// intermediate letters all commute with `x`, then emit the
    /// lexicographically least letter that can be moved to the front, repeatedly.
    /// Two words give the same normal form exactly when they are equal in
    /// that group.
    pub fn normalized<F>(&self, commute: F) -> Self
    where
        F: Fn(&str, &str) -> bool,
    {
        let mut w = self.word.clone();
        'cancel: loop {
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    if w[j].sphere == w[i].sphere {
                        if w[j].sign == -w[i].sign {
                            w.remove(j);
                            w.remove(i);
                            continue 'cancel;
                        }
                        break;
                    }
                    if !commute(&w[i].sphere, &w[j].sphere) {
                        break;
                    }
                }
            }
            break;
        }
        let mut out = Vec::with_capacity(w.len());
        while !w.is_empty() {
            let k = (0..w.len())
                .filter(|&k| w[..k].iter().all(|y| y.sphere != w[k].sphere && commute(&y.sphere, &w[k].sphere)))
                .min_by(|&a, &b| w[a].cmp(&w[b]))
                .expect("the first letter is always movable");
            out.push(w.remove(k));
        }
        Self { word: out }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DiskDecl {
    pub label: String,
    /// `∂disk` is a Legendrian sphere in the binding.
    pub binding: bool,
    /// The disk is boundary parallel in the page.
    pub parallel: bool,
}

/// Abstract open book `Open(page, monodromy)` with its declared Lagrangian
/// disks and the pairs of labels whose Lagrangians intersect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpenBookDesc {
    pub n: usize,
    pub page: PageDesc,
    pub monodromy: MonodromyWord,
    pub disks: Vec<DiskDecl>,
    pub meets: Vec<(String, String)>,
}

impl OpenBookDesc {
    /// `Open(D^{2n}, id)` with one boundary-parallel disk `L` whose boundary
    /// lies in the binding.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            page: PageDesc { base: BALL.into(), handles: vec![], spheres: vec![] },
            monodromy: MonodromyWord::identity(),
            disks: vec![DiskDecl { label: "L".into(), binding: true, parallel: true }],
            meets: vec![],
        }
    }

    /// `Open(D(T*S^n), τ_S)`, the open book of the standard sphere.
    pub fn cotangent_sphere(n: usize) -> Self {
        Self {
            n,
            page: PageDesc { base: DISK_COTANGENT_SPHERE.into(), handles: vec![], spheres: vec![ZERO_SECTION.into()] },
            monodromy: MonodromyWord { word: vec![Twist::positive(ZERO_SECTION)] },
            disks: vec![],
            meets: vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Argument("open book needs n >= 1".into()));
        }
        check_label(&self.page.base)?;
        let mut handles = BTreeSet::new();
        for h in &self.page.handles {
            check_label(&h.label)?;
            if h.index > self.n {
                return Err(Error::Argument(format!("handle {} has index {} > n = {}", h.label, h.index, self.n)));
            }
            if !handles.insert(&h.label) {
                return Err(Error::Argument(format!("duplicate handle label {}", h.label)));
            }
        }
        let mut names = BTreeSet::new();
        for s in self.page.spheres.iter().chain(self.disks.iter().map(|d| &d.label)) {
            check_label(s)?;
            if !names.insert(s.as_str()) {
                return Err(Error::Argument(format!("duplicate sphere or disk label {s}")));
            }
        }
        for t in &self.monodromy.word {
            if !self.has_sphere(&t.sphere) {
                return Err(Error::Argument(format!("monodromy twists about unknown sphere {}", t.sphere)));
            }
            if t.sign != 1 && t.sign != -1 {
                return Err(Error::Argument(format!("twist sign must be +-1, got {}", t.sign)));
            }
        }
        for (a, b) in &self.meets {
            for x in [a, b] {
                if !names.contains(x.as_str()) {
                    return Err(Error::Argument(format!("intersection refers to unknown label {x}")));
                }
            }
        }
        Ok(())
    }

    pub fn has_sphere(&self, label: &str) -> bool {
        self.page.spheres.iter().any(|s| s == label)
    }

    pub fn disk(&self, label: &str) -> Option<&DiskDecl> {
        self.disks.iter().find(|d| d.label == label)
    }

    /// Labels of disks whose boundary lies in the binding.
    pub fn binding_labels(&self) -> Vec<String> {
        self.disks.iter().filter(|d| d.binding).map(|d| d.label.clone()).collect()
    }

    pub fn meet(&self, a: &str, b: &str) -> bool {
        self.meets.iter().any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Twists about disjoint spheres commute.
    pub fn commute(&self, a: &str, b: &str) -> bool {
        a != b && !self.meet(a, b)
    }

    /// Compose the monodromy on the right with `τ_sphere^sign`.
    pub fn twist(&self, sphere: &str, sign: i8) -> Result<Self> {
        if !self.has_sphere(sphere) {
            return Err(Error::Argument(format!("no sphere {sphere} in the page")));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::Argument(format!("twist sign must be +-1, got {sign}")));
        }
        let mut out = self.clone();
        out.monodromy.word.push(Twist { sphere: sphere.to_string(), sign });
        Ok(out)
    }

    /// Legendrian surgery along a page sphere: `Open(Σ, φ) ↦ Open(Σ, φ ∘ τ)`.
    pub fn surgery_rewrite(&self, sphere: &str) -> Result<Self> {
        self.twist(sphere, 1)
    }

    /// Stabilise along a declared disk with boundary in the binding: attach
    /// an index `n` handle along its boundary, register `disk ∪ core` and
    /// compose with a positive twist about it.
    pub fn stabilize(&self, disk: &str) -> Result<Self> {
        let decl = self.disk(disk).ok_or_else(|| Error::Argument(format!("no disk {disk} declared")))?;
        if !decl.binding {
            return Err(Error::Argument(format!("disk {disk} does not have boundary in the binding")));
        }
        let handle = attaching_label(disk);
        let sphere = stabilised_sphere(disk);
        if self.page.handles.iter().any(|h| h.label == handle) || self.has_sphere(&sphere) {
            return Err(Error::Argument(format!("already stabilised along {disk}")));
        }
        let mut out = self.clone();
        out.page.handles.push(Handle { index: self.n, label: handle });
        out.page.spheres.push(sphere.clone());
        let inherited: Vec<(String, String)> = self
            .meets
            .iter()
            .filter_map(|(a, b)| {
                if a == disk {
                    Some((sphere.clone(), b.clone()))
                } else if b == disk {
                    Some((a.clone(), sphere.clone()))
                } else {
                    None
                }
            })
            .collect();
        out.meets.extend(inherited);
        out.monodromy.word.push(Twist::positive(&sphere));
        Ok(out)
    }

    /// The ball with a single critical handle attached along the boundary of
    /// a boundary-parallel disk `L` is `D(T*S^n)`, with `L ∪ core` the zero
    /// section.
    fn recognise_cotangent_sphere(&self) -> Option<Self> {
        if self.page.base != BALL || self.page.handles.len() != 1 || self.page.spheres.len() != 1 {
            return None;
        }
        let h = &self.page.handles[0];
        let disk = self.disks.iter().find(|d| d.parallel && attaching_label(&d.label) == h.label)?;
        let sphere = stabilised_sphere(&disk.label);
        if h.index != self.n || self.page.spheres[0] != sphere {
            return None;
        }
        let rename = |s: &String| if *s == sphere { ZERO_SECTION.to_string() } else { s.clone() };
        Some(Self {
            n: self.n,
            page: PageDesc { base: DISK_COTANGENT_SPHERE.into(), handles: vec![], spheres: vec![ZERO_SECTION.into()] },
            monodromy: MonodromyWord {
                word: self.monodromy.word.iter().map(|t| Twist { sphere: rename(&t.sphere), sign: t.sign }).collect(),
            },
            disks: self.disks.iter().filter(|d| d.label != disk.label).cloned().collect(),
            meets: self
                .meets
                .iter()
                .filter(|(a, b)| *a != disk.label && *b != disk.label)
                .map(|(a, b)| (rename(a), rename(b)))
                .collect(),
        })
    }

    /// Representative used for descriptor equivalence: page recognition,
    /// sorted registries and the normal form of the word.
    pub fn canonical(&self) -> Self {
        let mut out = self.recognise_cotangent_sphere().unwrap_or_else(|| self.clone());
        out.page.handles.sort();
        out.page.spheres.sort();
        out.disks.sort();
        let mut meets: Vec<(String, String)> =
            out.meets.iter().map(|(a, b)| if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) }).collect();
        meets.sort();
        meets.dedup();
        out.meets = meets;
        out.monodromy = out.monodromy.normalized(|a, b| out.commute(a, b));
        out
    }

    pub fn canonical_text(&self) -> String {
        self.canonical().to_string()
    }

    pub fn equivalent(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

fn list<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    format!("[{}]", items.iter().map(f).collect::<Vec<_>>().join(","))
}

/// One-line text form:
/// `n=2 page=D^{2n} handles=[2@dL] spheres=[S(L)] disks=[L:bp] meets=[A~B] word=[S(L)+]`.
impl fmt::Display for OpenBookDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} page={} handles={} spheres={} disks={} meets={} word={}",
            self.n,
            self.page.base,
            list(&self.page.handles, |h| format!("{}@{}", h.index, h.label)),
            list(&self.page.spheres, |s| s.clone()),
            list(&self.disks, |d| {
                let mut flags = String::new();
                if d.binding {
                    flags.push('b');
                }
                if d.parallel {
                    flags.push('p');
                }
                if flags.is_empty() {
                    flags.push('-');
                }
                format!("{}:{}", d.label, flags)
            }),
            list(&self.meets, |(a, b)| format!("{a}~{b}")),
            list(&self.monodromy.word, |t| format!("{}{}", t.sphere, if t.sign > 0 { '+' } else { '-' })),
        )
    }
}

fn parse_list(v: &str) -> Result<Vec<&str>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Argument(format!("expected [..], got {v:?}")))?;
    Ok(if inner.is_empty() { vec![] } else { inner.split(',').collect() })
}

fn split2<'a>(s: &'a str, sep: char) -> Result<(&'a str, &'a str)> {
    s.split_once(sep).ok_or_else(|| Error::Argument(format!("expected '{sep}' in {s:?}")))
}

impl FromStr for OpenBookDesc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut n = None;
        let mut base = None;
        let (mut handles, mut spheres, mut disks, mut meets, mut word) = (vec![], vec![], vec![], vec![], vec![]);
        for tok in s.split_whitespace() {
            let (key, value) = split2(tok, '=')?;
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|e| Error::Argument(format!("n: {e}")))?),
                "page" => base = Some(value.to_string()),
                "handles" => {
                    for h in parse_list(value)? {
                        let (i, label) = split2(h, '@')?;
                        let index = i.parse().map_err(|e| Error::Argument(format!("handle index: {e}")))?;
                        handles.push(Handle { index, label: label.to_string() });
                    }
                }
                "spheres" => spheres = parse_list(value)?.into_iter().map(String::from).collect(),
                "disks" => {
                    for d in parse_list(value)? {
                        let (label, flags) = split2(d, ':')?;
                        if flags.is_empty() || !flags.chars().all(|c| matches!(c, 'b' | 'p' | '-')) {
                            return Err(Error::Argument(format!("bad disk flags {flags:?}")));
                        }
                        disks.push(DiskDecl { label: label.to_string(), binding: flags.contains('b'), parallel: flags.contains('p') });
                    }
                }
                "meets" => {
                    for m in parse_list(value)? {
                        let (a, b) = split2(m, '~')?;
                        meets.push((a.to_string(), b.to_string()));
                    }
                }
                "word" => {
                    for t in parse_list(value)? {
                        let sign = match t.chars().last() {
                            Some('+') => 1,
                            Some('-') => -1,
                            _ => return Err(Error::Argument(format!("twist {t:?} lacks a sign"))),
                        };
                        word.push(Twist { sphere: t[..t.len() - 1].to_string(), sign });
                    }
                }
                other => return Err(Error::Argument(format!("unknown field {other:?}"))),
            }
        }
        let ob = Self {
            n: n.ok_or_else(|| Error::Argument("missing n".into()))?,
            page: PageDesc { base: base.ok_or_else(|| Error::Argument("missing page".into()))?, handles, spheres },
            monodromy: MonodromyWord { word },
            disks,
            meets,
        };
        ob.validate()?;
        Ok(ob)
    }
}

// ---------------------------------------------------------------------------
// Relative open books

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BallMove {
    Add,
    Remove,
}

impl BallMove {
    pub fn flip(self) -> Self {
        match self {
            BallMove::Add => BallMove::Remove,
            BallMove::Remove => BallMove::Add,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convexity {
    Convex,
    Concave,
}

/// `({S_i}_{i=0}^{2k}, h)`: consecutive pages differ by adding or removing a
/// standard ball, alternately, and `h` identifies `S_{2k}` with `S_0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelativeOpenBook {
    pub name: String,
    pub pages: Vec<String>,
    /// Move taking `S_0` to `S_1`.
    pub first_move: BallMove,
    pub monodromy: MonodromyWord,
}

impl RelativeOpenBook {
    pub fn new(name: &str, pages: Vec<String>, first_move: BallMove, monodromy: MonodromyWord) -> Result<Self> {
        if pages.len() < 3 || pages.len() % 2 == 0 {
            return Err(Error::Argument(format!("a relative open book has 2k+1 >= 3 pages, got {}", pages.len())));
        }
        for p in &pages {
            check_label(p)?;
        }
        Ok(Self { name: name.to_string(), pages, first_move, monodromy })
    }

    /// The ball neighbourhood of a properly embedded Lagrangian disk: `k = 4`,
    /// disk cotangent bundles of `D^n` at even pages and of the annulus at odd
    /// pages, identity monodromy.
    pub fn ball() -> Self {
        let (d, a) = ("D(T*D^n)", "D(T*(S^{n-1}xI))");
        Self::new("ball", [d, a, d, a, d].map(String::from).to_vec(), BallMove::Remove, MonodromyWord::identity())
            .expect("fixture")
    }

    /// Complement of the ball in the standard sphere: disk cotangent bundles
    /// of `S^n` at even pages and of `D^n` at odd pages, monodromy `τ_S`.
    pub fn ball_complement() -> Self {
        let (s, d) = (DISK_COTANGENT_SPHERE, "D(T*D^n)");
        Self::new(
            "ball complement",
            [s, d, s, d, s].map(String::from).to_vec(),
            BallMove::Remove,
            MonodromyWord { word: vec![Twist::positive(ZERO_SECTION)] },
        )
        .expect("fixture")
    }

    /// Index `2k` of the last page.
    pub fn last_index(&self) -> usize {
        self.pages.len() - 1
    }

    /// Move from `S_i` to `S_{i+1}`, indices mod `2k`.
    pub fn move_at(&self, i: usize) -> BallMove {
        if (i % self.last_index()) % 2 == 0 {
            self.first_move
        } else {
            self.first_move.flip()
        }
    }

    /// A ball is removed through a convex `α_i` and attached along a concave one.
    pub fn alpha(&self, i: usize) -> Convexity {
        match self.move_at(i) {
            BallMove::Remove => Convexity::Convex,
            BallMove::Add => Convexity::Concave,
        }
    }

    /// Shift page indices by one, `S'_i = S_{i-1}`. Needs identity monodromy.
    pub fn shifted(&self) -> Result<Self> {
        if !self.monodromy.is_empty() {
            return Err(Error::Argument(format!("{} has non-trivial monodromy and cannot be shifted", self.name)));
        }
        let two_k = self.last_index();
        let mut pages = vec![self.pages[two_k - 1].clone()];
        pages.extend(self.pages[..two_k].iter().cloned());
        Ok(Self {
            name: format!("{} (shifted)", self.name),
            pages,
            first_move: self.first_move.flip(),
            monodromy: self.monodromy.clone(),
        })
    }
}

/// Result of gluing two relative open books page by page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GluedOpenBook {
    pub pages: Vec<(String, String)>,
    pub monodromy: MonodromyWord,
}

/// Glue along matching boundaries: at every index one side must be concave
/// where the other is convex, so the ball removed on one side is the ball
/// attached on the other. The monodromy is `h_1 ∪ h_2`; the supports are
/// disjoint so the twists commute.
pub fn glue(a: &RelativeOpenBook, b: &RelativeOpenBook) -> Result<GluedOpenBook> {
    if a.pages.len() != b.pages.len() {
        return Err(Error::Argument(format!("page counts differ: {} vs {}", a.pages.len(), b.pages.len())));
    }
    for i in 0..a.pages.len() {
        if a.alpha(i) == b.alpha(i) {
            return Err(Error::Construction(format!(
                "{} and {} are both {:?} at page {i}",
                a.name,
                b.name,
                a.alpha(i)
            )));
        }
    }
    let monodromy = a.monodromy.concat(&b.monodromy).normalized(|x, y| x != y);
    Ok(GluedOpenBook {
        pages: a.pages.iter().cloned().zip(b.pages.iter().cloned()).collect(),
        monodromy,
    })
}

// ---------------------------------------------------------------------------
// Generalised Dehn twist on T*S^n = {|q| = 1, q.p = 0}

/// Twist angle `g_1(|p|)`: `π` on `[0, inner]`, a clamped smoothstep down to
/// `0` on `[inner, outer]`, and `0` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for TwistProfile {
    fn default() -> Self {
        Self { inner: 0.1, outer: 0.9 }
    }
}

impl TwistProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::Argument(format!("twist profile needs 0 <= inner < outer, got {inner}, {outer}")));
        }
        Ok(Self { inner, outer })
    }

    pub fn g1(&self, r: f64) -> f64 {
        PI * (1.0 - smoothstep((r - self.inner) / (self.outer - self.inner)))
    }

    /// `|p|` beyond which the twist is the identity.
    pub fn support(&self) -> f64 {
        self.outer
    }
}

/// Normalised geodesic flow `σ_t(q, p) = (cos t q + sin t p/|p|, -|p| sin t q + cos t p)`.
pub fn sigma(t: f64, q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let r = norm(p);
    let (s, c) = t.sin_cos();
    let q2 = q.iter().zip(p).map(|(a, b)| c * a + s * b / r).collect();
    let p2 = q.iter().zip(p).map(|(a, b)| -r * s * a + c * b).collect();
    (q2, p2)
}

/// Generalised Dehn twist `τ`: `σ_{g_1(|p|)}` for `p ≠ 0` and `-Id` on the zero
/// section, re-projected onto `|q| = 1, q.p = 0`.
pub fn dehn_twist_map(q: &[f64], p: &[f64], profile: &TwistProfile) -> (Vec<f64>, Vec<f64>) {
    let (q2, p2) = if norm(p) == 0.0 {
        (q.iter().map(|x| -x).collect(), p.to_vec())
    } else {
        sigma(profile.g1(norm(p)), q, p)
    };
    let q2 = normalized(&q2);
    let p2 = reject(&p2, &q2);
    (q2, p2)
}

fn cotangent_at_radius<R: Rng>(rng: &mut R, n: usize, r_min: f64, r_max: f64) -> (Vec<f64>, Vec<f64>) {
    loop {
        let (q, p) = random_cotangent(rng, n, 1.0);
        let np = norm(&p);
        if np < 1e-3 {
            continue;
        }
        let r = rng.gen_range(r_min..=r_max);
        let p = reject(&p.iter().map(|x| x * r / np).collect::<Vec<_>>(), &q);
        return (q, p);
    }
}

fn join(q: &[f64], p: &[f64]) -> Vec<f64> {
    let mut v = q.to_vec();
    v.extend_from_slice(p);
    v
}

/// `τ(τ(q, 0)) = (q, 0)` and `τ(q, 0) = (-q, 0)` on random zero-section points.
pub fn check_zero_section_involution(n: usize, count: usize, seed: u64, profile: &TwistProfile) -> Report {
    let mut rng = rng(seed);
    let samples = (0..count)
        .map(|_| {
            let (q, _) = cotangent_at_radius(&mut rng, n, 0.0, 0.0);
            let zero = vec![0.0; n + 1];
            let (q1, p1) = dehn_twist_map(&q, &zero, profile);
            let (q2, p2) = dehn_twist_map(&q1, &p1, profile);
            let neg: Vec<f64> = q.iter().map(|x| -x).collect();
            let r = dist_inf(&join(&q2, &p2), &join(&q, &zero)).max(dist_inf(&join(&q1, &p1), &join(&neg, &zero)));
            Sample::Residual(r, q)
        })
        .collect();
    Report::from_samples("openbook: Dehn twist involution on zero section", "tau = -Id on p = 0", 1e-12, samples)
}

/// `τ = id` on random points with `|p|` in `[0.9, 1.8]`, beyond the default support.
pub fn check_identity_outside_support(n: usize, count: usize, seed: u64, profile: &TwistProfile) -> Report {
    let mut rng = rng(seed);
    let base = TwistProfile::default().support();
    let samples = (0..count)
        .map(|_| {
            let (q, p) = cotangent_at_radius(&mut rng, n, base, 2.0 * base);
            let (q1, p1) = dehn_twist_map(&q, &p, profile);
            let x = join(&q, &p);
            Sample::Residual(dist_inf(&join(&q1, &p1), &x), x)
        })
        .collect();
    Report::from_samples("openbook: Dehn twist identity outside support", "g1 = 0 beyond |p| = 0.9", 1e-12, samples)
}

/// `dp ∧ dq` on `T*S^n ⊂ R^{2n+2}`, vectors laid out as `[dq, dp]`.
pub fn omega_cotangent(u: &[f64], v: &[f64]) -> f64 {
    let m = u.len() / 2;
    dot(&u[m..], &v[..m]) - dot(&v[m..], &u[..m])
}

/// Curve through `(q, p)` in `T*S^n` with initial direction `(a, b)`.
fn cotangent_curve(q: &[f64], p: &[f64], a: &[f64], b: &[f64], s: f64) -> (Vec<f64>, Vec<f64>) {
    let qs = normalized(&q.iter().zip(a).map(|(x, y)| x + s * y).collect::<Vec<_>>());
    let ps = reject(&p.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>(), &qs);
    (qs, ps)
}

/// Symplectomorphism check: `|τ^*ω − ω|` on random tangent 2-planes,
/// normalised by the input vector norms. `distort` scales the output `p`,
/// which breaks the identity and serves as a negative control.
pub fn check_twist_symplectic(n: usize, count: usize, seed: u64, profile: &TwistProfile, distort: f64, h: f64) -> Report {
    let mut rng = rng(seed);
    let map = |q: &[f64], p: &[f64]| {
        let (q1, p1) = dehn_twist_map(q, p, profile);
        join(&q1, &p1.iter().map(|x| x * (1.0 + distort)).collect::<Vec<_>>())
    };
    let samples = (0..count)
        .map(|_| {
            let (q, p) = cotangent_at_radius(&mut rng, n, 0.0, 1.0);
            let dirs: Vec<(Vec<f64>, Vec<f64>)> = (0..2)
                .map(|_| {
                    let a: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let b: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    (a, b)
                })
                .collect();
            let vel = |f: &dyn Fn(f64) -> Vec<f64>| curve_velocity(f, h);
            let u = vel(&|s| {
                let (a, b) = cotangent_curve(&q, &p, &dirs[0].0, &dirs[0].1, s);
                join(&a, &b)
            });
            let v = vel(&|s| {
                let (a, b) = cotangent_curve(&q, &p, &dirs[1].0, &dirs[1].1, s);
                join(&a, &b)
            });
            let tu = vel(&|s| {
                let (a, b) = cotangent_curve(&q, &p, &dirs[0].0, &dirs[0].1, s);
                map(&a, &b)
            });
            let tv = vel(&|s| {
                let (a, b) = cotangent_curve(&q, &p, &dirs[1].0, &dirs[1].1, s);
                map(&a, &b)
            });
            let scale = norm(&u) * norm(&v);
            if scale < 1e-10 {
                return Sample::Excluded;
            }
            let r = (omega_cotangent(&tu, &tv) - omega_cotangent(&u, &v)).abs() / scale;
            Sample::Residual(r, join(&q, &p))
        })
        .collect();
    Report::from_samples("openbook: Dehn twist symplectic", "tau^* dp^dq = dp^dq", 1e-6, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stabilising_the_trivial_open_book_gives_the_sphere_open_book() {
        for n in 1..=4 {
            let st = OpenBookDesc::trivial(n).stabilize("L").unwrap();
            assert_eq!(st.page.handles, vec![Handle { index: n, label: "dL".into() }]);
            assert_eq!(st.monodromy.word, vec![Twist::positive("S(L)")]);
            assert!(st.equivalent(&OpenBookDesc::cotangent_sphere(n)));
            assert!(!OpenBookDesc::trivial(n).equivalent(&OpenBookDesc::cotangent_sphere(n)));
        }
    }

    #[test]
    fn stabilize_errors() {
        let ob = OpenBookDesc::trivial(2);
        assert!(matches!(ob.stabilize("M"), Err(Error::Argument(_))));
        let st = ob.stabilize("L").unwrap();
        assert!(matches!(st.stabilize("L"), Err(Error::Argument(_))));
        let mut interior = ob.clone();
        interior.disks[0].binding = false;
        assert!(interior.stabilize("L").is_err());
        assert!(ob.surgery_rewrite("S").is_err());
    }

    #[test]
    fn surgery_and_inverse_cancel() {
        let ob = OpenBookDesc::cotangent_sphere(2);
        let back = ob.surgery_rewrite("S").unwrap().twist("S", -1).unwrap();
        assert_eq!(back.monodromy.len(), 3);
        assert_eq!(back.canonical(), ob.canonical());
        let id = ob.twist("S", -1).unwrap();
        assert!(id.canonical().monodromy.is_empty());
    }

    #[test]
    fn text_round_trip() {
        let mut ob = OpenBookDesc::trivial(3).stabilize("L").unwrap();
        ob.meets.push(("L".into(), "S(L)".into()));
        let text = ob.to_string();
        assert_eq!(text, "n=3 page=D^{2n} handles=[3@dL] spheres=[S(L)] disks=[L:bp] meets=[L~S(L)] word=[S(L)+]");
        assert_eq!(text.parse::<OpenBookDesc>().unwrap(), ob);
        for bad in [
            "n=2 page=D^{2n} handles=[3@dL] spheres=[] disks=[] meets=[] word=[]",
            "n=2 page=D^{2n} handles=[] spheres=[] disks=[] meets=[] word=[X+]",
            "n=2 page=D^{2n} word=[S]",
            "page=D^{2n}",
            "n=2 page=D^{2n} colour=red",
        ] {
            assert!(bad.parse::<OpenBookDesc>().is_err(), "{bad}");
        }
    }

    #[test]
    fn words_commute_only_when_disjoint() {
        let w = MonodromyWord { word: vec![Twist::positive("B"), Twist::positive("A")] };
        assert_eq!(w.normalized(|a, b| a != b).word, vec![Twist::positive("A"), Twist::positive("B")]);
        assert_eq!(w.normalized(|_, _| false), w);
        let x = MonodromyWord { word: vec![Twist::positive("A"), Twist::positive("B"), Twist::positive("A").inverse()] };
        assert_eq!(x.normalized(|a, b| a != b).word, vec![Twist::positive("B")]);
        assert!(x.concat(&x.inverse()).normalized(|_, _| false).is_empty());
        assert_eq!(x.normalized(|_, _| false), x);
    }

    #[test]
    fn ball_and_complement_glue_to_the_sphere_open_book() {
        let ball = RelativeOpenBook::ball();
        assert_eq!(ball.last_index(), 4);
        let shifted = ball.shifted().unwrap();
        assert_eq!(shifted.pages[1], ball.pages[0]);
        let glued = glue(&shifted, &RelativeOpenBook::ball_complement()).unwrap();
        assert_eq!(glued.monodromy, OpenBookDesc::cotangent_sphere(2).monodromy);
        assert!(glue(&ball, &RelativeOpenBook::ball_complement()).is_err());
        assert!(RelativeOpenBook::ball_complement().shifted().is_err());
    }

    #[test]
    fn twist_profile_shape() {
        let g = TwistProfile::default();
        assert_eq!(g.g1(0.0), PI);
        assert_eq!(g.g1(0.1), PI);
        assert_eq!(g.g1(0.9), 0.0);
        assert!((g.g1(0.5) - PI / 2.0).abs() < 1e-15);
        let mut prev = PI;
        for k in 0..=1000 {
            let v = g.g1(k as f64 / 1000.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn dehn_twist_checks() {
        let g = TwistProfile::default();
        for n in 1..=3 {
            let r = check_zero_section_involution(n, 200, 7, &g);
            assert!(r.pass, "{}", r.line());
            let r = check_identity_outside_support(n, 200, 7, &g);
            assert!(r.pass, "{} {:?}", r.line(), r.argmax);
            let r = check_twist_symplectic(n, 300, 7, &g, 0.0, 1e-5);
            assert!(r.pass, "{}", r.line());
            let bad = check_twist_symplectic(n, 300, 7, &g, 0.5, 1e-5);
            assert!(bad.max_residual > 1e-2, "{}", bad.line());
            let wide = TwistProfile::new(0.1, 2.5).unwrap();
            assert!(check_identity_outside_support(n, 200, 7, &wide).max_residual > 1e-2);
        }
    }

    #[test]
    fn sigma_preserves_the_cotangent_bundle() {
        let q = [0.0, 0.6, 0.8];
        let p = [0.3, 0.0, 0.0];
        for t in [0.3, 1.0, PI] {
            let (q2, p2) = sigma(t, &q, &p);
            assert!((norm(&q2) - 1.0).abs() < 1e-15);
            assert!(dot(&q2, &p2).abs() < 1e-15);
            assert!((norm(&p2) - 0.3).abs() < 1e-15);
        }
        let (q2, p2) = sigma(PI, &q, &p);
        assert!(dist_inf(&q2, &[0.0, -0.6, -0.8]) < 1e-15 && dist_inf(&p2, &[-0.3, 0.0, 0.0]) < 1e-15);
    }
}
