use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use linclass::datagen::{self, CsvLoad, LabelRule};
use linclass::{BasisSpec, Dataset};

/// Where training data comes from and how rows become classes.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset CSV with a header row
    #[arg(long, conflicts_with = "field")]
    pub data: Option<PathBuf>,
    /// Feature columns, comma separated (default: every column but the label)
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    /// Label column
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Label mapping such as `setosa=1,versicolor=0`; unmapped rows are skipped
    #[arg(long, value_delimiter = ',', conflicts_with = "label_above")]
    pub label_map: Vec<String>,
    /// Numeric label column: class 1 iff the value exceeds this level
    #[arg(long)]
    pub label_above: Option<f64>,
    /// n×n field CSV (no header) to segment instead of a dataset
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Segmentation level for --field
    #[arg(long, default_value_t = datagen::DEFAULT_FIELD_THRESHOLD)]
    pub field_threshold: f64,
}

impl DataArgs {
    pub fn load(&self) -> Result<Dataset> {
        if let Some(path) = &self.field {
            let grid = datagen::load_field_csv(path).with_context(|| format!("reading field {}", path.display()))?;
            return Ok(datagen::segment_field(&grid, self.field_threshold)?);
        }
        let Some(path) = &self.data else {
            bail!(crate::UsageError("one of --data or --field is required".into()));
        };
        let features = if self.features.is_empty() {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let header = text.lines().next().unwrap_or("");
            header
                .split(',')
                .map(str::trim)
                .filter(|c| !c.is_empty() && *c != self.label)
                .map(String::from)
                .collect()
        } else {
            self.features.clone()
        };
        let cols: Vec<&str> = features.iter().map(String::as_str).collect();
        let CsvLoad { dataset, skipped } = datagen::load_csv(path, &cols, &self.label, &self.label_rule()?)
            .with_context(|| format!("reading {}", path.display()))?;
        if skipped > 0 {
            log::info!("skipped {skipped} rows with unmapped labels");
        }
        if dataset.is_empty() {
            bail!(crate::UsageError(format!("{} has no labelled rows", path.display())));
        }
        Ok(dataset)
    }

    fn label_rule(&self) -> Result<LabelRule> {
        if let Some(level) = self.label_above {
            return Ok(LabelRule::Above(level));
        }
        if self.label_map.is_empty() {
            return Ok(LabelRule::Map(vec![("0".into(), 0), ("1".into(), 1)]));
        }
        let pairs = self
            .label_map
            .iter()
            .map(|entry| {
                let (k, v) = entry
                    .split_once('=')
                    .with_context(|| format!("label mapping `{entry}` is not of the form name=class"))?;
                match v.trim() {
                    "0" => Ok((k.trim().to_string(), 0)),
                    "1" => Ok((k.trim().to_string(), 1)),
                    other => bail!(crate::UsageError(format!("class `{other}` must be 0 or 1"))),
                }
            })
            .collect::<Result<_>>()?;
        Ok(LabelRule::Map(pairs))
    }
}

/// Affine basis matching the raw dimension of the data.
pub fn default_basis(ds: &Dataset) -> BasisSpec {
    if ds.raw_dim() == 2 {
        BasisSpec::Linear2D
    } else {
        BasisSpec::Linear(ds.raw_dim())
    }
}
