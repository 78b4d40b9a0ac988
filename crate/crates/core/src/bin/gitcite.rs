fn main() {
    let cwd = std::env::current_dir().unwrap_or_else(|_| ".".into());
    let stdin = std::io::stdin();
    let code =
        gitcite::cli::run(std::env::args_os(), &cwd, &mut stdin.lock(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
