use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kv::{parse_key_values, parse_list, parse_value};

/// Network hyper-parameters.
///
/// Text form (`key = value`, `#` comments), every key optional:
///
/// | key                  | default         | meaning                                   |
/// |----------------------|-----------------|-------------------------------------------|
/// | `input_channels`     | 3               | image channels                            |
/// | `stem_channels`      | 16              | stride-2 stem before the four stages      |
/// | `channels`           | 16,32,64,128    | feature channels at 1/4, 1/8, 1/16, 1/32  |
/// | `levels`             | 4               | pyramid depth (only 4 is supported)       |
/// | `consensus_channels` | 16              | hidden width of the 4D consensus stack    |
/// | `radius`             | 4               | local correlation search radius           |
/// | `temperature`        | 1/sqrt(c4)      | soft-argmax temperature                   |
/// | `refine_channels`    | 16              | hidden width of the coarse flow refiner   |
/// | `flow_head_channels` | 64,32           | hidden widths of each flow head           |
/// | `cd_head_channels`   | 64,32           | hidden widths of each change head         |
#[derive(Debug, Clone, PartialEq)]
pub struct ArchConfig {
    pub input_channels: usize,
    pub stem_channels: usize,
    pub channels: [usize; 4],
    pub levels: usize,
    pub consensus_channels: usize,
    pub radius: usize,
    pub temperature: Option<f64>,
    pub refine_channels: usize,
    pub flow_head_channels: [usize; 2],
    pub cd_head_channels: [usize; 2],
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            input_channels: 3,
            stem_channels: 16,
            channels: [16, 32, 64, 128],
            levels: 4,
            consensus_channels: 16,
            radius: 4,
            temperature: None,
            refine_channels: 16,
            flow_head_channels: [64, 32],
            cd_head_channels: [64, 32],
        }
    }
}

/// Input sizes must be multiples of this.
pub const SIZE_DIVISOR: usize = 32;

fn fixed<const N: usize>(key: &str, value: &str) -> Result<[usize; N]> {
    let v: Vec<usize> = parse_list(key, value)?;
    v.try_into()
        .map_err(|v: Vec<usize>| Error::Config(format!("`{key}` needs {N} values, got {}", v.len())))
}

impl ArchConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut arch = Self::default();
        for (key, value) in map {
            match key.as_str() {
                "input_channels" => arch.input_channels = parse_value(key, value)?,
                "stem_channels" => arch.stem_channels = parse_value(key, value)?,
                "channels" => arch.channels = fixed(key, value)?,
                "levels" => arch.levels = parse_value(key, value)?,
                "consensus_channels" => arch.consensus_channels = parse_value(key, value)?,
                "radius" => arch.radius = parse_value(key, value)?,
                "temperature" => {
                    arch.temperature = match value.as_str() {
                        "auto" => None,
                        v => Some(parse_value(key, v)?),
                    }
                }
                "refine_channels" => arch.refine_channels = parse_value(key, value)?,
                "flow_head_channels" => arch.flow_head_channels = fixed(key, value)?,
                "cd_head_channels" => arch.cd_head_channels = fixed(key, value)?,
                other => return Err(Error::Config(format!("unknown architecture key `{other}`"))),
            }
        }
        arch.validate()?;
        Ok(arch)
    }

    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        out += &format!("input_channels = {}\n", self.input_channels);
        out += &format!("stem_channels = {}\n", self.stem_channels);
        out += &format!("channels = {}\n", list(&self.channels));
        out += &format!("levels = {}\n", self.levels);
        out += &format!("consensus_channels = {}\n", self.consensus_channels);
        out += &format!("radius = {}\n", self.radius);
        match self.temperature {
            Some(t) => out += &format!("temperature = {t}\n"),
            None => out += "temperature = auto\n",
        }
        out += &format!("refine_channels = {}\n", self.refine_channels);
        out += &format!("flow_head_channels = {}\n", list(&self.flow_head_channels));
        out += &format!("cd_head_channels = {}\n", list(&self.cd_head_channels));
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels != 4 {
            return Err(Error::Config(format!("only 4 pyramid levels are supported, got {}", self.levels)));
        }
        if self.radius == 0 {
            return Err(Error::Config("radius must be >= 1".into()));
        }
        let widths = [self.input_channels, self.stem_channels, self.consensus_channels, self.refine_channels]
            .into_iter()
            .chain(self.channels)
            .chain(self.flow_head_channels)
            .chain(self.cd_head_channels);
        if widths.into_iter().any(|c| c == 0) {
            return Err(Error::Config("channel counts must be positive".into()));
        }
        if let Some(t) = self.temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("temperature must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
            .unwrap_or_else(|| 1.0 / (self.channels[3] as f64).sqrt())
    }

    /// Local correlation channels, `(2r + 1)²`.
    pub fn local_corr_channels(&self) -> usize {
        (2 * self.radius + 1).pow(2)
    }

    /// Feature channels at pyramid level `level` (1 = finest).
    pub fn level_channels(&self, level: usize) -> usize {
        self.channels[level - 1]
    }

    /// Every parameter tensor the network reads, with its shape.
    pub fn schema(&self) -> Vec<(String, Vec<usize>)> {
        let mut s = Vec::new();
        let mut conv = |name: String, out: usize, inp: usize| {
            s.push((format!("{name}.weight"), vec![out, inp, 3, 3]));
            s.push((format!("{name}.bias"), vec![out]));
        };
        conv("extractor.stem".into(), self.stem_channels, self.input_channels);
        let mut prev = self.stem_channels;
        for (i, &c) in self.channels.iter().enumerate() {
            conv(format!("extractor.stage{}", i + 1), c, prev);
            prev = c;
        }
        conv("head4.refine.0".into(), self.refine_channels, 3);
        conv("head4.refine.1".into(), 2, self.refine_channels);
        for level in 1..=3 {
            let [f0, f1] = self.flow_head_channels;
            conv(format!("level{level}.flow_head.0"), f0, self.local_corr_channels() + 2);
            conv(format!("level{level}.flow_head.1"), f1, f0);
            conv(format!("level{level}.flow_head.2"), 2, f1);
            let [c0, c1] = self.cd_head_channels;
            conv(format!("level{level}.cd_head.0"), c0, self.level_channels(level));
            conv(format!("level{level}.cd_head.1"), c1, c0);
            conv(format!("level{level}.cd_head.2"), 2, c1);
        }
        let k = self.consensus_channels;
        for (i, (out, inp)) in [(k, 1), (k, k), (1, k)].into_iter().enumerate() {
            s.push((format!("consensus.{i}.weight"), vec![out, inp, 3, 3, 3, 3]));
        }
        s
    }

    /// Final layers of residual branches; initialized to zero.
    pub fn is_residual_final(name: &str) -> bool {
        name.starts_with("head4.refine.1.") || name.contains(".flow_head.2.")
    }
}
