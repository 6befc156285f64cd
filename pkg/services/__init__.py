# Builders, exact linear algebra, bounds, sampling and report rendering
