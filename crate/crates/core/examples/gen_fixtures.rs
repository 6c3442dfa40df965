//! Regenerate the canonical fixture files under fixtures/.

use floer_core::fixtures;
use floer_core::io;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: String| {
        std::fs::write(dir.join(name), text).unwrap();
        println!("wrote {name}");
    };
    write(
        "unknot.knot",
        io::render(&io::knot_to_doc(&fixtures::unknot(), &[])),
    );
    write(
        "trefoil.knot",
        io::render(&io::knot_to_doc(&fixtures::trefoil(), &[])),
    );
    write(
        "figure_eight.knot",
        io::render(&io::knot_to_doc(&fixtures::figure_eight(), &[])),
    );
    write("s3.iota", io::render(&io::iota_to_doc(&fixtures::s3_iota())));
    write(
        "u_cubed.iota",
        io::render(&io::iota_to_doc(&fixtures::u_cubed_iota())),
    );
    write(
        "s1s2.complex",
        io::render(&io::complex_to_file(&fixtures::s1s2_complex())),
    );
    write(
        "s2xs2_w1.hyperbox",
        io::render(&io::hyperbox_to_doc(&fixtures::handle_square_w1())),
    );
    write(
        "s2xs2_w2.hyperbox",
        io::render(&io::hyperbox_to_doc(&fixtures::handle_square_w2())),
    );
    // the stacked two-square box ships too, in the same format
    let stacked = floer_core::hypercube::stack(
        &fixtures::handle_square_w1(),
        &fixtures::handle_square_w2(),
        0,
    )
    .unwrap();
    write("s2xs2.hyperbox", io::render(&io::hyperbox_to_doc(&stacked)));
}
