use std::path::PathBuf;
use std::time::Duration;

use clap::Args;

use cdi_core::aggregate::{convergence_profile, median_graph, profile_csv, summary_csv};
use cdi_core::PropositionFile;
use cdi_llm::{
    sample_graphs, BackendConfig, Cassette, CassetteBackend, ChatBackend, OpenAiBackend,
    RetryPolicy,
};

use crate::artifacts::{sample_path, CONVERGENCE_CSV, CONVERGENCE_SUMMARY_CSV, MEDIAN_GRAPH};
use crate::error::{domain, read_file, usage, write_file, CliError};

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Proposition file (`# Header` / `- pN: text` sections)
    #[arg(long)]
    pub props: PathBuf,
    /// Run directory for samples, the median graph, and the profile
    #[arg(long)]
    pub out: PathBuf,
    /// Number of graph samples to request
    #[arg(long, default_value_t = 15)]
    pub n: usize,
    /// Random subsamples per n in the convergence profile
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Seed for all randomness in this command
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cassette file: replayed unless --record is set
    #[arg(long)]
    pub cassette: Option<PathBuf>,
    /// Record live responses into the cassette instead of replaying it
    #[arg(long, default_value_t = false)]
    pub record: bool,
    /// Chat-completion endpoint base URL
    #[arg(long, default_value = "https://api.openai.com/v1")]
    pub backend_url: String,
    /// Model name sent to the backend
    #[arg(long, default_value = "gpt-4o-mini")]
    pub model: String,
    /// Sampling temperature (backend default when omitted)
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Attempts per request on transport failures
    #[arg(long, default_value_t = 3)]
    pub transport_retries: u32,
    /// Attempts per sample on unparseable responses
    #[arg(long, default_value_t = 1)]
    pub parse_retries: u32,
}

enum Backend {
    Live(OpenAiBackend),
    Cassette(CassetteBackend),
}

impl Backend {
    fn as_chat(&self) -> &dyn ChatBackend {
        match self {
            Backend::Live(b) => b,
            Backend::Cassette(b) => b,
        }
    }
}

pub fn run(args: &CompileArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let props = PropositionFile::parse(&read_file(&args.props)?)
        .map_err(|e| usage(format!("{}: {e}", args.props.display())))?;

    let live = || {
        OpenAiBackend::new(BackendConfig {
            base_url: args.backend_url.clone(),
            model: args.model.clone(),
            temperature: args.temperature,
            ..BackendConfig::default()
        })
    };
    let backend = match (&args.cassette, args.record) {
        (Some(path), false) => {
            let cassette =
                Cassette::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Backend::Cassette(CassetteBackend::replay(cassette))
        }
        (Some(_), true) => Backend::Cassette(CassetteBackend::record(Box::new(live()))),
        (None, true) => return Err(usage("--record needs --cassette to name the file")),
        (None, false) => Backend::Live(live()),
    };

    let retry = RetryPolicy {
        transport_attempts: args.transport_retries,
        parse_attempts: args.parse_retries,
        base_delay: Duration::from_millis(250),
    };
    let run = sample_graphs(&props, backend.as_chat(), args.n, &retry).map_err(domain)?;

    for (index, error) in &run.failures {
        eprintln!("sample {} failed: {error}", index + 1);
    }
    for (index, graph) in &run.graphs {
        write_file(&sample_path(&args.out, *index), &graph.to_json())?;
    }

    let graphs = run.graphs_only();
    let median = median_graph(&graphs).map_err(domain)?;
    write_file(&args.out.join(MEDIAN_GRAPH), &median.to_json())?;

    if graphs.len() >= 2 {
        let profile = convergence_profile(&graphs, args.trials, args.seed).map_err(domain)?;
        write_file(&args.out.join(CONVERGENCE_CSV), &profile_csv(&profile))?;
        write_file(
            &args.out.join(CONVERGENCE_SUMMARY_CSV),
            &summary_csv(&profile),
        )?;
    } else {
        eprintln!("only one sample succeeded; skipping the convergence profile");
    }

    if args.record {
        if let (Backend::Cassette(recorder), Some(path)) = (&backend, &args.cassette) {
            recorder
                .save(path)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            println!(
                "recorded {} responses to {}",
                recorder.cassette().len(),
                path.display()
            );
        }
    }

    println!(
        "compiled {}/{} samples; median graph with {} edges at {}",
        run.graphs.len(),
        args.n,
        median.edge_count(),
        args.out.join(MEDIAN_GRAPH).display()
    );
    Ok(())
}
