use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PRIOR_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub values: Vec<String>,
    pub priors: Vec<f64>,
}

impl Attribute {
    pub fn new(name: &str, values: &[&str], priors: &[f64]) -> Self {
        Attribute {
            name: name.to_string(),
            values: values.iter().map(|s| s.to_string()).collect(),
            priors: priors.to_vec(),
        }
    }

    /// An attribute whose values are equally likely.
    pub fn uniform(name: &str, values: &[&str]) -> Self {
        let p = 1.0 / values.len() as f64;
        Self::new(name, values, &vec![p; values.len()])
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaRepr {
    attributes: Vec<Attribute>,
}

/// Ordered attributes, each with an ordered value list and a prior over it.
///
/// Values are addressed either locally (attribute index, value index) or
/// through a global index that enumerates every value of every attribute in
/// declaration order. The global index is the row/column space of the
/// openness matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemaRepr", into = "SchemaRepr")]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    offsets: Vec<usize>,
}

impl TryFrom<SchemaRepr> for AttributeSchema {
    type Error = Error;

    fn try_from(repr: SchemaRepr) -> Result<Self> {
        AttributeSchema::new(repr.attributes)
    }
}

impl From<AttributeSchema> for SchemaRepr {
    fn from(schema: AttributeSchema) -> Self {
        SchemaRepr {
            attributes: schema.attributes,
        }
    }
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::InvalidSchema("no attributes".into()));
        }
        let mut offsets = Vec::with_capacity(attributes.len());
        let mut total = 0;
        for (i, attr) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|a| a.name == attr.name) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate attribute `{}`",
                    attr.name
                )));
            }
            if attr.values.len() < 2 {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{}` needs at least two values",
                    attr.name
                )));
            }
            for (j, v) in attr.values.iter().enumerate() {
                if attr.values[..j].contains(v) {
                    return Err(Error::InvalidSchema(format!(
                        "duplicate value `{v}` in attribute `{}`",
                        attr.name
                    )));
                }
            }
            if attr.priors.len() != attr.values.len() {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{}` has {} values but {} priors",
                    attr.name,
                    attr.values.len(),
                    attr.priors.len()
                )));
            }
            if attr.priors.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidSchema(format!(
                    "attribute `{}` has a negative or non-finite prior",
                    attr.name
                )));
            }
            let sum: f64 = attr.priors.iter().sum();
            if (sum - 1.0).abs() > PRIOR_TOLERANCE {
                return Err(Error::InvalidSchema(format!(
                    "priors of attribute `{}` sum to {sum}",
                    attr.name
                )));
            }
            offsets.push(total);
            total += attr.values.len();
        }
        Ok(AttributeSchema {
            attributes,
            offsets,
        })
    }

    /// Gender, workplace and location with independent priors: 1/2 each for
    /// gender and location, 1/3 each for workplace.
    pub fn default_scenario() -> Self {
        AttributeSchema::new(vec![
            Attribute::uniform("gender", &["male", "female"]),
            Attribute::uniform("workplace", &["Starbucks", "Google", "Ikea"]),
            Attribute::uniform("location", &["York", "Leeds"]),
        ])
        .expect("default schema is valid")
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    /// Number of values across all attributes.
    pub fn total_values(&self) -> usize {
        self.attributes.iter().map(|a| a.values.len()).sum()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn value_index(&self, attribute: usize, value: &str) -> Option<usize> {
        self.attributes
            .get(attribute)?
            .values
            .iter()
            .position(|v| v == value)
    }

    /// Resolves `(attribute name, value name)` to local indices.
    pub fn lookup(&self, attribute: &str, value: &str) -> Result<(usize, usize)> {
        let a = self
            .attribute_index(attribute)
            .ok_or_else(|| Error::UnknownValue(format!("attribute `{attribute}`")))?;
        let v = self
            .value_index(a, value)
            .ok_or_else(|| Error::UnknownValue(format!("{attribute}={value}")))?;
        Ok((a, v))
    }

    pub fn global_index(&self, attribute: usize, value: usize) -> usize {
        self.offsets[attribute] + value
    }

    /// Resolves a value name to its global index. Accepts `attribute=value`
    /// or a bare value name that is unique across the schema.
    pub fn resolve_value(&self, name: &str) -> Result<usize> {
        if let Some((attr, value)) = name.split_once('=') {
            let (a, v) = self.lookup(attr.trim(), value.trim())?;
            return Ok(self.global_index(a, v));
        }
        let mut found = None;
        for (a, attr) in self.attributes.iter().enumerate() {
            if let Some(v) = attr.values.iter().position(|x| x == name) {
                if found.is_some() {
                    return Err(Error::UnknownValue(format!(
                        "`{name}` is ambiguous; qualify it as attribute=value"
                    )));
                }
                found = Some(self.global_index(a, v));
            }
        }
        found.ok_or_else(|| Error::UnknownValue(name.to_string()))
    }

    /// `(attribute name, value name)` of a global value index.
    pub fn value_label(&self, global: usize) -> Option<(&str, &str)> {
        let a = self.offsets.iter().rposition(|&o| o <= global)?;
        let attr = &self.attributes[a];
        let v = attr.values.get(global - self.offsets[a])?;
        Some((attr.name.as_str(), v.as_str()))
    }

    /// Global value indices held by a profile, one per attribute.
    pub fn group_set(&self, values: &[usize]) -> Vec<usize> {
        values
            .iter()
            .enumerate()
            .map(|(a, &v)| self.global_index(a, v))
            .collect()
    }

    pub(crate) fn check_profile(&self, values: &[usize]) -> Result<()> {
        if values.len() != self.attributes.len() {
            return Err(Error::SchemaMismatch(format!(
                "profile has {} values, schema has {} attributes",
                values.len(),
                self.attributes.len()
            )));
        }
        for (attr, &v) in self.attributes.iter().zip(values) {
            if v >= attr.values.len() {
                return Err(Error::SchemaMismatch(format!(
                    "value index {v} out of range for attribute `{}`",
                    attr.name
                )));
            }
        }
        Ok(())
    }

    /// Number of distinct profiles (product of value counts).
    pub fn profile_class_count(&self) -> usize {
        self.attributes.iter().map(|a| a.values.len()).product()
    }

    /// Mixed-radix index of a profile among all possible profiles.
    pub fn profile_class(&self, values: &[usize]) -> usize {
        values
            .iter()
            .zip(&self.attributes)
            .fold(0, |acc, (&v, a)| acc * a.values.len() + v)
    }

    /// Inverse of [`profile_class`](Self::profile_class).
    pub fn class_values(&self, mut class: usize) -> Vec<usize> {
        let mut values = vec![0; self.attributes.len()];
        for (slot, attr) in values.iter_mut().zip(&self.attributes).rev() {
            let k = attr.values.len();
            *slot = class % k;
            class /= k;
        }
        values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_layout() {
        let s = AttributeSchema::default_scenario();
        assert_eq!(s.attribute_count(), 3);
        assert_eq!(s.total_values(), 7);
        assert_eq!(s.resolve_value("Ikea").unwrap(), 4);
        assert_eq!(s.resolve_value("location=Leeds").unwrap(), 6);
        assert_eq!(s.value_label(4), Some(("workplace", "Ikea")));
        assert_eq!(s.value_label(0), Some(("gender", "male")));
        assert!(s.value_label(7).is_none());
        assert!(s.resolve_value("Amazon").is_err());
    }

    #[test]
    fn profile_classes_round_trip() {
        let s = AttributeSchema::default_scenario();
        assert_eq!(s.profile_class_count(), 12);
        for c in 0..12 {
            assert_eq!(s.profile_class(&s.class_values(c)), c);
        }
    }

    #[test]
    fn rejects_invalid_schemas() {
        assert!(AttributeSchema::new(vec![]).is_err());
        assert!(AttributeSchema::new(vec![Attribute::uniform("a", &["x"])]).is_err());
        assert!(AttributeSchema::new(vec![Attribute::uniform("a", &["x", "x"])]).is_err());
        assert!(AttributeSchema::new(vec![Attribute::new("a", &["x", "y"], &[0.6, 0.6])]).is_err());
        assert!(AttributeSchema::new(vec![
            Attribute::uniform("a", &["x", "y"]),
            Attribute::uniform("a", &["z", "w"]),
        ])
        .is_err());
    }

    #[test]
    fn ambiguous_bare_names_are_rejected() {
        let s = AttributeSchema::new(vec![
            Attribute::uniform("a", &["x", "y"]),
            Attribute::uniform("b", &["x", "z"]),
        ])
        .unwrap();
        assert!(s.resolve_value("x").is_err());
        assert_eq!(s.resolve_value("b=x").unwrap(), 2);
    }
}
