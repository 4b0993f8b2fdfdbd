use drsub_core::instance::Instance;
use drsub_core::problems::{gen_covering, gen_influence, gen_quadratic};

use crate::args::{Family, GenerateArgs};
use crate::CliError;

pub fn build(args: &GenerateArgs) -> Result<Instance, CliError> {
    let need_n = |what: &str| {
        args.n
            .ok_or_else(|| CliError::Usage(format!("{what} instances need --n")))
    };
    Ok(match args.kind {
        Family::Quadratic => Instance::quadratic(gen_quadratic(need_n("quadratic")?, args.m, args.seed)?, args.seed),
        Family::Covering => Instance::covering(
            {
                let mut inst = gen_covering(need_n("covering")?, args.j, args.budget, args.capacitated, args.seed)?;
                inst.g_kind = args.g.into();
                inst
            },
            args.seed,
        ),
        Family::Influence => {
            let nodes = args
                .nodes
                .or(args.n)
                .ok_or_else(|| CliError::Usage("influence instances need --nodes".into()))?;
            Instance::influence(gen_influence(nodes, args.budget, args.g.into(), args.seed)?, args.seed)
        }
    })
}

pub fn run(args: &GenerateArgs) -> Result<(), CliError> {
    let instance = build(args)?;
    match &args.out {
        Some(path) => {
            instance.write(path)?;
            eprintln!("wrote {} instance (n = {}) to {}", instance.kind.as_str(), instance.n, path.display());
        }
        None => print!("{}", instance.to_json()?),
    }
    Ok(())
}
