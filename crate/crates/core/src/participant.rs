use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// The twenty national central banks of the euro area, ISO country codes.
pub const EUROSYSTEM_NCBS: [&str; 20] = [
    "AT", "BE", "CY", "DE", "EE", "ES", "FI", "FR", "GR", "HR", "IE", "IT", "LT", "LU", "LV", "MT",
    "NL", "PT", "SI", "SK",
];
pub const ECB_LABEL: &str = "ECB";
pub const EXTRA_EURO_AREA_LABEL: &str = "XEA";

/// Stable index of a participant in a [`ParticipantSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticipantId(pub usize);

impl ParticipantId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ordered, uniquely labelled participants. Labels are for presentation;
/// the ledger itself only sees indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticipantSet {
    labels: Vec<String>,
    by_label: HashMap<String, usize>,
}

impl ParticipantSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut by_label = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.contains(',') || label.trim() != label {
                return Err(Error::param(
                    "participant",
                    format!("invalid label `{label}`"),
                ));
            }
            if by_label.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateParticipant(label.clone()));
            }
        }
        Ok(ParticipantSet { labels, by_label })
    }

    /// The euro-area NCBs, optionally followed by the ECB and the
    /// extra-euro-area row (n = 20, 21 or 22).
    pub fn eurosystem(with_ecb: bool, with_extra_euro_area: bool) -> Self {
        let mut labels: Vec<&str> = EUROSYSTEM_NCBS.to_vec();
        if with_ecb {
            labels.push(ECB_LABEL);
        }
        if with_extra_euro_area {
            labels.push(EXTRA_EURO_AREA_LABEL);
        }
        ParticipantSet::new(labels).expect("static labels are unique")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: ParticipantId) -> &str {
        &self.labels[id.0]
    }

    pub fn id(&self, label: &str) -> Result<ParticipantId> {
        self.by_label
            .get(label)
            .map(|&i| ParticipantId(i))
            .ok_or_else(|| Error::UnknownParticipant(label.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = ParticipantId> {
        (0..self.labels.len()).map(ParticipantId)
    }
}
