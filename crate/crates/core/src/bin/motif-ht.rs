fn main() {
    std::process::exit(motif_ht::cli::main());
}
