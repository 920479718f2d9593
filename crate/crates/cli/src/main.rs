use std::process::ExitCode;

fn main() -> ExitCode {
    // LAMBDA_LAB_THREADS caps worker parallelism; results are identical
    // for any value by construction.
    if let Ok(threads) = std::env::var("LAMBDA_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    ExitCode::from(lambda_lab_cli::run(std::env::args()))
}
