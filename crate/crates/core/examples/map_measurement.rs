//! Map a detection's bottom-center pixel onto the ground plane together with
//! its correlated covariance.

use ucmc::geometry::{CameraExtrinsics, CameraIntrinsics, CameraModel, ImagePoint};

fn main() -> ucmc::Result<()> {
    let camera = CameraModel::new(
        CameraIntrinsics::new(1000.0, 1000.0, 960.0, 540.0),
        CameraExtrinsics::looking_down(8.0, 20f64.to_radians()),
        0.0,
    )?;
    let projection = camera.projection();
    println!("A =\n{}", projection.matrix());

    // a 40x120 px box whose feet sit at (1100, 700)
    for (u, v) in [(1100.0, 700.0), (1100.0, 400.0), (1100.0, 250.0)] {
        let m = projection.map_measurement(ImagePoint::new(u, v), (40.0, 120.0), 0.05)?;
        let r = m.covariance;
        let corr = r[(0, 1)] / (r[(0, 0)] * r[(1, 1)]).sqrt();
        println!(
            "pixel ({u:.0}, {v:.0}) -> ground ({:.2}, {:.2}) m, std ({:.3}, {:.3}) m, correlation {corr:.3}",
            m.position.x,
            m.position.y,
            r[(0, 0)].sqrt(),
            r[(1, 1)].sqrt()
        );
    }
    Ok(())
}
