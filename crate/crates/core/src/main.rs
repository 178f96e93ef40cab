fn main() {
    let mut stdout = std::io::stdout().lock();
    let code = ginibre_overlaps::cli::run(std::env::args_os(), &mut stdout);
    std::process::exit(code);
}
