//! Run configuration with the documented defaults, overridable first by a
//! key=value config file and then by command-line flags.

use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub grid: usize,
    pub np: usize,
    pub na: usize,
    pub gamma: f64,
    pub steps: usize,
    pub lr: f64,
    pub lr_final: f64,
    pub seed: u64,
    pub lambda_image: f64,
    pub lambda_grid: f64,
    pub lambda_contour: f64,
    pub lambda_regular: f64,
    pub lambda_ksq: f64,
    pub kmin_sq: f64,
    pub band: f64,
    pub mc: usize,
    pub size: usize,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: 128,
            np: 16,
            na: 6,
            gamma: glyphfit::pseudo_field::DEFAULT_GAMMA,
            steps: 2000,
            lr: 1e-2,
            lr_final: 1e-3,
            seed: 0,
            lambda_image: 1.0,
            lambda_grid: 100.0,
            lambda_contour: 1000.0,
            lambda_regular: 1.0,
            lambda_ksq: 0.1,
            kmin_sq: 0.25,
            band: glyphfit::exact_sdf::DEFAULT_BAND,
            mc: glyphfit::exact_sdf::DEFAULT_CONTOUR_SAMPLES,
            size: 512,
            jobs: 1,
        }
    }
}

impl RunConfig {
    /// Applies one `key=value` setting; unknown keys are rejected so typos
    /// in config files surface immediately.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse()
                .map_err(|_| format!("invalid value '{v}' for {key}"))
        }
        match key {
            "grid" => self.grid = parse(key, value)?,
            "np" => self.np = parse(key, value)?,
            "na" => self.na = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "lr-final" | "lr_final" => self.lr_final = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "lambda-image" | "lambda_image" => self.lambda_image = parse(key, value)?,
            "lambda-grid" | "lambda_grid" => self.lambda_grid = parse(key, value)?,
            "lambda-contour" | "lambda_contour" => self.lambda_contour = parse(key, value)?,
            "lambda-regular" | "lambda_regular" => self.lambda_regular = parse(key, value)?,
            "lambda-ksq" | "lambda_ksq" => self.lambda_ksq = parse(key, value)?,
            "kmin-sq" | "kmin_sq" => self.kmin_sq = parse(key, value)?,
            "band" => self.band = parse(key, value)?,
            "mc" => self.mc = parse(key, value)?,
            "size" => self.size = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            _ => return Err(format!("unknown config key '{key}'")),
        }
        Ok(())
    }

    /// Loads `key=value` lines; '#' starts a comment, blank lines ignored.
    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Validates the invariants the library modules assume.
    pub fn validate(&self) -> Result<(), String> {
        if self.grid < 8 {
            return Err("grid must be at least 8".into());
        }
        if self.np < 1 || self.na < 1 {
            return Err("np and na must be at least 1".into());
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err("gamma must be positive".into());
        }
        if self.steps < 1 {
            return Err("steps must be at least 1".into());
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err("lr must be positive".into());
        }
        if self.band.is_nan() || self.band <= 0.0 {
            return Err("band must be positive".into());
        }
        if self.mc < 1 {
            return Err("mc must be at least 1".into());
        }
        let lambdas = [
            self.lambda_image,
            self.lambda_grid,
            self.lambda_contour,
            self.lambda_regular,
            self.lambda_ksq,
            self.kmin_sq,
        ];
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err("loss weights must be finite and nonnegative".into());
        }
        if self.size < 8 {
            return Err("size must be at least 8".into());
        }
        if self.jobs < 1 {
            return Err("jobs must be at least 1".into());
        }
        Ok(())
    }

    pub fn weights(&self) -> glyphfit::fit::LossWeights {
        glyphfit::fit::LossWeights {
            lambda_image: self.lambda_image,
            lambda_grid: self.lambda_grid,
            lambda_contour: self.lambda_contour,
            lambda_regular: self.lambda_regular,
            lambda_ksq: self.lambda_ksq,
            k_min_sq: self.kmin_sq,
        }
    }

    pub fn fit_config(&self) -> glyphfit::fit::FitConfig {
        glyphfit::fit::FitConfig {
            steps: self.steps,
            learning_rate: self.lr,
            final_learning_rate: self.lr_final,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            gamma: self.gamma,
            seed: self.seed,
        }
    }
}
