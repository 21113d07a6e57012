//! Command-line flags mirroring every configuration key.

use crate::config::RunConfig;
use crate::error::Result;
use clap::Args;

macro_rules! overrides {
    ($($key:ident),* $(,)?) => {
        /// `--key value` for every configuration key.
        #[derive(Debug, Clone, Default, Args)]
        pub struct Overrides {
            $(
                #[arg(long = stringify!($key), global = true, value_name = "VALUE")]
                pub $key: Option<String>,
            )*
        }

        impl Overrides {
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(if let Some(x) = &self.$key { v.push((stringify!($key), x.as_str())); })*
                v
            }
        }

        #[cfg(test)]
        const FLAG_KEYS: &[&str] = &[$(stringify!($key)),*];
    };
}

overrides!(
    z,
    alpha_inv,
    ref_n,
    ref_kappa,
    zeta1,
    beta,
    n_b,
    kappa_max,
    delta_z,
    richardson_tol,
    k_nodes_per_decade,
    k_max,
    k_tail_nodes,
    k_refine_tol,
    op_nodes_per_decade,
    op_cos_nodes,
    op_p_min,
    tail_powers,
    tail_points,
    basis_check,
    basis_check_nb,
    output_dir,
    cache_dir,
    threads,
);

impl Overrides {
    /// Apply command-line values on top of `cfg` and revalidate.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        for (k, v) in self.pairs() {
            cfg.set(k, v)?;
        }
        cfg.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_config_key_has_a_flag() {
        let keys: Vec<&str> = crate::config::KEYS.iter().map(|(k, _)| *k).collect();
        assert_eq!(keys, FLAG_KEYS);
    }
}
