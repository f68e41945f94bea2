//! Documents and education levels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-way education level collapsed from US K-12 grades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EducationLevel {
    Elementary = 0,
    Middle = 1,
    High = 2,
}

impl EducationLevel {
    pub const ALL: [EducationLevel; 3] = [Self::Elementary, Self::Middle, Self::High];
    pub const COUNT: usize = 3;

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Grades 1-5 elementary, 6-8 middle, 9-12 high.
    pub fn from_grade(grade: u32) -> Result<Self> {
        match grade {
            1..=5 => Ok(Self::Elementary),
            6..=8 => Ok(Self::Middle),
            9..=12 => Ok(Self::High),
            _ => Err(Error::Domain(format!("grade {grade} outside 1..=12"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Elementary => "elementary",
            Self::Middle => "middle",
            Self::High => "high",
        }
    }

    /// Label as it appears in LLM prompts.
    pub fn school_label(self) -> &'static str {
        match self {
            Self::Elementary => "elementary school",
            Self::Middle => "middle school",
            Self::High => "high school",
        }
    }
}

impl fmt::Display for EducationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EducationLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "elementary" | "0" => Ok(Self::Elementary),
            "middle" | "1" => Ok(Self::Middle),
            "high" | "2" => Ok(Self::High),
            other => Err(Error::Domain(format!("unknown education level '{other}'"))),
        }
    }
}

/// One ScienceQA-style item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EduDocument {
    pub doc_id: String,
    pub question: String,
    #[serde(default)]
    pub choices: Vec<String>,
    #[serde(default)]
    pub solution: String,
    #[serde(default)]
    pub lecture: String,
    #[serde(default)]
    pub level: Option<EducationLevel>,
}

impl EduDocument {
    pub fn new(doc_id: impl Into<String>, question: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            question: question.into(),
            choices: Vec::new(),
            solution: String::new(),
            lecture: String::new(),
            level: None,
        }
    }

    pub fn with_choices<I, S>(mut self, choices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.choices = choices.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_solution(mut self, solution: impl Into<String>) -> Self {
        self.solution = solution.into();
        self
    }

    pub fn with_lecture(mut self, lecture: impl Into<String>) -> Self {
        self.lecture = lecture.into();
        self
    }

    pub fn with_level(mut self, level: EducationLevel) -> Self {
        self.level = Some(level);
        self
    }

    /// `question + " " + choices joined by " " + " " + solution + " " + lecture`.
    pub fn full_text(&self) -> String {
        format!(
            "{} {} {} {}",
            self.question,
            self.choices.join(" "),
            self.solution,
            self.lecture
        )
    }

    /// The analysis units of the document: question, each choice, solution, lecture.
    /// Sentences never span two units.
    pub fn sections(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.question.as_str())
            .chain(self.choices.iter().map(String::as_str))
            .chain([self.solution.as_str(), self.lecture.as_str()])
    }

    pub fn validate(&self) -> Result<()> {
        if self.question.trim().is_empty() {
            return Err(Error::Domain(format!("document '{}' has an empty question", self.doc_id)));
        }
        Ok(())
    }
}
