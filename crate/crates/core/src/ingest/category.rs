//! The 17 custom venue categories and the rule table that maps raw
//! (category, subcategory) pairs onto them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Shipped default rule table.
pub const DEFAULT_CATEGORY_MAP: &str = include_str!("../../data/category_map.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Arts,
    Entertainment,
    City,
    Health,
    Professional,
    Religion,
    Drink,
    Fastfood,
    Restaurants,
    Home,
    Outdoors,
    Sports,
    School,
    Services,
    Shopping,
    Transport,
    Travel,
}

impl Category {
    pub const COUNT: usize = 17;

    pub const ALL: [Category; Category::COUNT] = [
        Category::Arts,
        Category::Entertainment,
        Category::City,
        Category::Health,
        Category::Professional,
        Category::Religion,
        Category::Drink,
        Category::Fastfood,
        Category::Restaurants,
        Category::Home,
        Category::Outdoors,
        Category::Sports,
        Category::School,
        Category::Services,
        Category::Shopping,
        Category::Transport,
        Category::Travel,
    ];

    /// Position in [`Category::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Arts => "arts",
            Category::Entertainment => "entertainment",
            Category::City => "city",
            Category::Health => "health",
            Category::Professional => "professional",
            Category::Religion => "religion",
            Category::Drink => "drink",
            Category::Fastfood => "fastfood",
            Category::Restaurants => "restaurants",
            Category::Home => "home",
            Category::Outdoors => "outdoors",
            Category::Sports => "sports",
            Category::School => "school",
            Category::Services => "services",
            Category::Shopping => "shopping",
            Category::Transport => "transport",
            Category::Travel => "travel",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase();
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == wanted)
            .ok_or_else(|| IngestError::Config(format!("unknown category label {s:?}")))
    }
}

/// One ordered rule. Every matcher that is set must match; a rule with no
/// matchers is rejected when the map is loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryRule {
    /// Raw top-level category, compared case-insensitively.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Raw subcategory, compared case-insensitively.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcategory: Option<String>,
    /// Case-insensitive substring of the raw subcategory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcategory_contains: Option<String>,
    pub target: Category,
}

impl CategoryRule {
    fn matches(&self, raw_category: &str, raw_subcategory: &str) -> bool {
        let cat = raw_category.trim();
        let sub = raw_subcategory.trim();
        if let Some(c) = &self.category {
            if !c.trim().eq_ignore_ascii_case(cat) {
                return false;
            }
        }
        if let Some(s) = &self.subcategory {
            if !s.trim().eq_ignore_ascii_case(sub) {
                return false;
            }
        }
        if let Some(needle) = &self.subcategory_contains {
            let needle = needle.trim().to_lowercase();
            if !sub.to_lowercase().contains(&needle) {
                return false;
            }
        }
        true
    }

    fn has_matcher(&self) -> bool {
        self.category.is_some() || self.subcategory.is_some() || self.subcategory_contains.is_some()
    }
}

/// Ordered, first-match-wins remapping table with a default target, so the
/// mapping is total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryMap {
    pub default: Category,
    #[serde(default, rename = "rule")]
    pub rules: Vec<CategoryRule>,
}

impl CategoryMap {
    pub fn from_toml_str(text: &str) -> Result<Self, IngestError> {
        let map: CategoryMap =
            toml::from_str(text).map_err(|e| IngestError::Config(format!("invalid category map: {e}")))?;
        if let Some(pos) = map.rules.iter().position(|r| !r.has_matcher()) {
            return Err(IngestError::Config(format!(
                "category map rule #{} has no matcher",
                pos + 1
            )));
        }
        Ok(map)
    }

    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// The shipped table.
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_CATEGORY_MAP).expect("shipped category map is valid")
    }

    pub fn with_default(mut self, default: Category) -> Self {
        self.default = default;
        self
    }

    /// The target of the first matching rule, or `None` when only the
    /// default applies.
    pub fn lookup(&self, raw_category: &str, raw_subcategory: &str) -> Option<Category> {
        self.rules
            .iter()
            .find(|r| r.matches(raw_category, raw_subcategory))
            .map(|r| r.target)
    }
}

/// Total remapping of a raw pair onto one of the 17 labels.
pub fn remap_category(raw_category: &str, raw_subcategory: &str, map: &CategoryMap) -> Category {
    map.lookup(raw_category, raw_subcategory).unwrap_or(map.default)
}
