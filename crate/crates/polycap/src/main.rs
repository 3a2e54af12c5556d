fn main() {
    std::process::exit(polycap::cli::main_entry());
}
