use std::io::Write;

fn main() {
    if let Ok(v) = std::env::var("CISDAG_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(threads) => {
                // 0 leaves the pool size to rayon.
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                    eprintln!("error: cannot configure thread pool: {e}");
                    std::process::exit(2);
                }
            }
            Err(_) => {
                eprintln!("error: CISDAG_THREADS must be a nonnegative integer, got `{v}`");
                std::process::exit(2);
            }
        }
    }
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = cisdag_cli::run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
