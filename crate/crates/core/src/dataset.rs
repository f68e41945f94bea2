//! ScienceQA ingestion, balancing and train/test splitting.
//!
//! Randomness: the sample for level `L` is drawn by shuffling that level's
//! items (in ascending id order) with `rng_for(seed, "sample:L")` and taking
//! a prefix; the balanced set is then shuffled with `rng_for(seed, "order")`.
//! Stratified splits shuffle each level with `rng_for(seed, "split:L")`; the
//! unstratified split shuffles everything with `rng_for(seed, "split")`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::document::{EduDocument, EducationLevel};
use crate::error::{Error, Result};
use crate::rng::{rng_for, shuffle};

/// One ScienceQA problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RawItem {
    pub id: String,
    pub question: String,
    pub choices: Vec<String>,
    pub answer: usize,
    pub solution: String,
    pub lecture: String,
    /// 1 through 12.
    pub grade: u32,
    pub has_image: bool,
}

impl RawItem {
    pub fn level(&self) -> Result<EducationLevel> {
        EducationLevel::from_grade(self.grade)
    }

    pub fn to_document(&self) -> Result<EduDocument> {
        Ok(EduDocument::new(self.id.clone(), self.question.clone())
            .with_choices(self.choices.iter().cloned())
            .with_solution(self.solution.clone())
            .with_lecture(self.lecture.clone())
            .with_level(self.level()?))
    }
}

/// Maps grades 1-12 onto the three levels.
pub fn collapse_grade(grade: u32) -> Result<EducationLevel> {
    EducationLevel::from_grade(grade)
}

fn id_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

fn parse_item(id: &str, v: &Value) -> Result<RawItem> {
    let bad = |message: &str| Error::Format {
        record: id.to_string(),
        message: message.to_string(),
    };
    let obj = v.as_object().ok_or_else(|| bad("problem is not an object"))?;
    let text = |name: &str| -> Result<String> {
        match obj.get(name) {
            None | Some(Value::Null) => Ok(String::new()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(bad(&format!("field '{name}' is not a string"))),
        }
    };
    let question = text("question")?;
    if question.trim().is_empty() {
        return Err(bad("missing question"));
    }
    let choices = match obj.get("choices") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("choice is not a string")))
            .collect::<Result<_>>()?,
        Some(_) => return Err(bad("choices is not a list")),
    };
    let answer = match obj.get("answer") {
        None | Some(Value::Null) => 0,
        Some(a) => a.as_u64().ok_or_else(|| bad("answer is not an index"))? as usize,
    };
    let grade_str = text("grade")?;
    let grade: u32 = grade_str
        .trim()
        .strip_prefix("grade")
        .unwrap_or(grade_str.trim())
        .parse()
        .map_err(|_| bad(&format!("unparseable grade '{grade_str}'")))?;
    if !(1..=12).contains(&grade) {
        return Err(bad(&format!("grade {grade} outside 1..=12")));
    }
    let has_image = !matches!(obj.get("image"), None | Some(Value::Null));
    Ok(RawItem {
        id: id.to_string(),
        question,
        choices,
        answer,
        solution: text("solution")?,
        lecture: text("lecture")?,
        grade,
        has_image,
    })
}

/// Parses a ScienceQA problems document (`{id: problem, ...}`), sorted by id.
pub fn parse_scienceqa(json: &str) -> Result<Vec<RawItem>> {
    if json.trim().is_empty() {
        return Ok(Vec::new());
    }
    let root: Value = serde_json::from_str(json).map_err(|e| Error::Format {
        record: "<file>".into(),
        message: e.to_string(),
    })?;
    let map = root.as_object().ok_or_else(|| Error::Format {
        record: "<file>".into(),
        message: "expected an object keyed by problem id".into(),
    })?;
    let mut ids: Vec<&String> = map.keys().collect();
    ids.sort_by(|a, b| id_order(a, b));
    ids.into_iter().map(|id| parse_item(id, &map[id])).collect()
}

/// Reads a problems file, or `problems.json` inside a directory.
pub fn load_scienceqa(path: &Path) -> Result<Vec<RawItem>> {
    let file = if path.is_dir() { path.join("problems.json") } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    parse_scienceqa(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub seed: u64,
    pub per_class: usize,
    pub train_fraction: f64,
    pub stratify: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            per_class: 1516,
            train_fraction: 0.8,
            stratify: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.per_class == 0 {
            return Err(Error::Config("per_class must be positive".into()));
        }
        Ok(())
    }
}

/// Lowercased, whitespace-collapsed full text.
pub fn normalized_text(doc: &EduDocument) -> String {
    doc.full_text()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Drops image items and textual duplicates (first id wins), samples
/// `per_class` documents per level and shuffles the result.
pub fn build_balanced_dataset(items: &[RawItem], spec: &SplitSpec) -> Result<Vec<EduDocument>> {
    spec.validate()?;
    let mut sorted: Vec<&RawItem> = items.iter().filter(|i| !i.has_image).collect();
    sorted.sort_by(|a, b| id_order(&a.id, &b.id));

    let mut seen = HashSet::new();
    let mut by_level: BTreeMap<EducationLevel, Vec<EduDocument>> = BTreeMap::new();
    for item in sorted {
        let doc = item.to_document()?;
        if seen.insert(normalized_text(&doc)) {
            by_level.entry(item.level()?).or_default().push(doc);
        }
    }

    let mut out = Vec::with_capacity(spec.per_class * EducationLevel::COUNT);
    for level in EducationLevel::ALL {
        let mut pool = by_level.remove(&level).unwrap_or_default();
        if pool.len() < spec.per_class {
            return Err(Error::Capacity {
                level: level.to_string(),
                available: pool.len(),
                requested: spec.per_class,
            });
        }
        shuffle(&mut rng_for(spec.seed, &format!("sample:{level}")), &mut pool);
        pool.truncate(spec.per_class);
        out.extend(pool);
    }
    shuffle(&mut rng_for(spec.seed, "order"), &mut out);
    Ok(out)
}

/// Training rows per class: `floor(f * n_k)` each, then the leftover needed to
/// reach `floor(f * N)` goes one at a time to the classes with the largest
/// fractional parts (ties to the lower ordinal).
pub fn stratified_train_counts(class_sizes: &[usize], train_fraction: f64) -> Vec<usize> {
    let total: usize = class_sizes.iter().sum();
    let target = (train_fraction * total as f64).floor() as usize;
    let exact: Vec<f64> = class_sizes.iter().map(|&n| train_fraction * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut missing = target.saturating_sub(counts.iter().sum());
    for &k in order.iter().cycle().take(order.len() * 2) {
        if missing == 0 {
            break;
        }
        if counts[k] < class_sizes[k] {
            counts[k] += 1;
            missing -= 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Test => "test",
        }
    }
}

/// Returns `(train, test)`, each in input order.
pub fn split_train_test(docs: &[EduDocument], spec: &SplitSpec) -> Result<(Vec<EduDocument>, Vec<EduDocument>)> {
    spec.validate()?;
    if docs.is_empty() {
        return Err(Error::DegenerateInput("cannot split an empty dataset".into()));
    }
    let mut train_ids: HashSet<&str> = HashSet::new();
    if spec.stratify {
        let mut groups: Vec<Vec<&EduDocument>> = vec![Vec::new(); EducationLevel::COUNT];
        for d in docs {
            let level = d.level.ok_or_else(|| Error::Format {
                record: d.doc_id.clone(),
                message: "stratified split needs a level".into(),
            })?;
            groups[level.ordinal()].push(d);
        }
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        let counts = stratified_train_counts(&sizes, spec.train_fraction);
        for (level, (group, n_train)) in EducationLevel::ALL.iter().zip(groups.iter_mut().zip(counts)) {
            shuffle(&mut rng_for(spec.seed, &format!("split:{level}")), group);
            train_ids.extend(group[..n_train].iter().map(|d| d.doc_id.as_str()));
        }
    } else {
        let mut all: Vec<&EduDocument> = docs.iter().collect();
        shuffle(&mut rng_for(spec.seed, "split"), &mut all);
        let n_train = (spec.train_fraction * docs.len() as f64).floor() as usize;
        train_ids.extend(all[..n_train].iter().map(|d| d.doc_id.as_str()));
    }
    let (train, test): (Vec<_>, Vec<_>) = docs.iter().cloned().partition(|d| train_ids.contains(d.doc_id.as_str()));
    Ok((train, test))
}

/// Balanced, split dataset as stored on disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitDataset {
    pub train: Vec<EduDocument>,
    pub test: Vec<EduDocument>,
}

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const DOCUMENTS_FILE: &str = "documents.jsonl";

impl SplitDataset {
    pub fn build(items: &[RawItem], spec: &SplitSpec) -> Result<Self> {
        let docs = build_balanced_dataset(items, spec)?;
        let (train, test) = split_train_test(&docs, spec)?;
        Ok(Self { train, test })
    }

    pub fn all(&self) -> impl Iterator<Item = (&EduDocument, Split)> {
        self.train
            .iter()
            .map(|d| (d, Split::Train))
            .chain(self.test.iter().map(|d| (d, Split::Test)))
    }

    pub fn class_counts(docs: &[EduDocument]) -> [usize; 3] {
        let mut c = [0; 3];
        for d in docs {
            if let Some(l) = d.level {
                c[l.ordinal()] += 1;
            }
        }
        c
    }

    pub fn manifest_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["doc_id", "level", "split"]).expect("in-memory write");
        for (d, split) in self.all() {
            let level = d.level.map_or("", EducationLevel::as_str);
            w.write_record([d.doc_id.as_str(), level, split.as_str()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
    }

    pub fn documents_jsonl(&self) -> String {
        let mut out = String::new();
        for (d, _) in self.all() {
            out.push_str(&serde_json::to_string(d).expect("documents serialize"));
            out.push('\n');
        }
        out
    }

    /// Writes `manifest.csv` and `documents.jsonl` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [(MANIFEST_FILE, self.manifest_csv()), (DOCUMENTS_FILE, self.documents_jsonl())] {
            let path = dir.join(name);
            let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            f.write_all(body.as_bytes()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST_FILE);
        let mut splits: HashMap<String, Split> = HashMap::new();
        let mut order = Vec::new();
        let mut r = csv::Reader::from_path(&manifest_path)?;
        for rec in r.records() {
            let rec = rec?;
            let split = match &rec[2] {
                "train" => Split::Train,
                "test" => Split::Test,
                other => {
                    return Err(Error::Format {
                        record: rec[0].to_string(),
                        message: format!("unknown split '{other}'"),
                    })
                }
            };
            splits.insert(rec[0].to_string(), split);
            order.push(rec[0].to_string());
        }
        let docs_path = dir.join(DOCUMENTS_FILE);
        let docs = read_documents(&docs_path)?;
        let by_id: HashMap<&str, &EduDocument> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
        let mut out = Self::default();
        for id in &order {
            let d = by_id.get(id.as_str()).ok_or_else(|| Error::Format {
                record: id.clone(),
                message: format!("listed in {MANIFEST_FILE} but missing from {DOCUMENTS_FILE}"),
            })?;
            match splits[id] {
                Split::Train => out.train.push((*d).clone()),
                Split::Test => out.test.push((*d).clone()),
            }
        }
        Ok(out)
    }
}

/// Reads documents from JSON lines.
pub fn read_documents(path: &Path) -> Result<Vec<EduDocument>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: EduDocument = serde_json::from_str(&line).map_err(|e| Error::Format {
            record: format!("{}:{}", path.display(), i + 1),
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn items(per_level: usize) -> Vec<RawItem> {
        let mut out = Vec::new();
        for (g, grade) in [2u32, 7, 10].iter().enumerate() {
            for i in 0..per_level {
                out.push(RawItem {
                    id: format!("{}", g * 1000 + i),
                    question: format!("Question {g} number {i}?"),
                    choices: vec!["a".into(), "b".into()],
                    answer: 0,
                    solution: "Because.".into(),
                    lecture: String::new(),
                    grade: *grade,
                    has_image: false,
                });
            }
        }
        out
    }

    #[test]
    fn parses_problem_map() {
        let text = json!({
            "10": {"question": "Q1?", "choices": ["x"], "answer": 0, "grade": "grade3", "image": null, "solution": "", "lecture": ""},
            "2": {"question": "Q2?", "choices": [], "answer": 0, "grade": "grade9", "image": "image.png"},
            "3": {"question": "Q3?", "grade": "grade6"}
        })
        .to_string();
        let items = parse_scienceqa(&text).unwrap();
        assert_eq!(items.iter().map(|i| i.id.as_str()).collect::<Vec<_>>(), ["2", "3", "10"]);
        assert_eq!(items.iter().filter(|i| i.has_image).count(), 1);
        assert!(parse_scienceqa("").unwrap().is_empty());
        assert!(parse_scienceqa("{}").unwrap().is_empty());
    }

    #[test]
    fn bad_record_is_named() {
        let text = json!({"7": {"question": "Q?", "grade": "grade13"}}).to_string();
        match parse_scienceqa(&text) {
            Err(Error::Format { record, .. }) => assert_eq!(record, "7"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn balanced_and_capacity() {
        let spec = SplitSpec {
            per_class: 10,
            ..SplitSpec::default()
        };
        let docs = build_balanced_dataset(&items(10), &spec).unwrap();
        assert_eq!(SplitDataset::class_counts(&docs), [10, 10, 10]);

        let mut few = items(10);
        few.retain(|i| i.grade != 2 || i.id.parse::<usize>().unwrap() < 5);
        match build_balanced_dataset(&few, &spec) {
            Err(Error::Capacity { level, available, .. }) => {
                assert_eq!(level, "elementary");
                assert_eq!(available, 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_images_dropped() {
        let mut it = items(3);
        let mut dup = it[0].clone();
        dup.id = "99999".into();
        dup.question = dup.question.to_uppercase().replace(' ', "  ");
        it.push(dup);
        let mut img = it[1].clone();
        img.id = "88888".into();
        img.question = "Look at the picture.".into();
        img.has_image = true;
        it.push(img);
        let spec = SplitSpec {
            per_class: 3,
            ..SplitSpec::default()
        };
        let docs = build_balanced_dataset(&it, &spec).unwrap();
        assert_eq!(docs.len(), 9);
        assert!(docs.iter().all(|d| d.doc_id != "99999" && d.doc_id != "88888"));
    }

    #[test]
    fn split_counts() {
        assert_eq!(stratified_train_counts(&[1516, 1516, 1516], 0.8), [1213, 1213, 1212]);
        assert_eq!(stratified_train_counts(&[10, 10, 10], 0.8), [8, 8, 8]);
        let spec = SplitSpec {
            per_class: 10,
            ..SplitSpec::default()
        };
        let docs = build_balanced_dataset(&items(10), &spec).unwrap();
        let (train, test) = split_train_test(&docs, &spec).unwrap();
        assert_eq!(SplitDataset::class_counts(&train), [8, 8, 8]);
        assert_eq!(SplitDataset::class_counts(&test), [2, 2, 2]);
        assert_eq!((train.clone(), test.clone()), split_train_test(&docs, &spec).unwrap());

        let flat = SplitSpec { stratify: false, ..spec };
        let (train, test) = split_train_test(&docs, &flat).unwrap();
        assert_eq!((train.len(), test.len()), (24, 6));
    }

    #[test]
    fn save_load_round_trip() {
        let spec = SplitSpec {
            per_class: 4,
            ..SplitSpec::default()
        };
        let ds = SplitDataset::build(&items(6), &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ds.save(dir.path()).unwrap();
        assert_eq!(SplitDataset::load(dir.path()).unwrap(), ds);
        let manifest = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert!(manifest.starts_with("doc_id,level,split\n"));
        assert_eq!(manifest.lines().count(), 13);
    }
}
