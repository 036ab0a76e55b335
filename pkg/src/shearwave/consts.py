PRODUCT_NAME = "ShearWave"
PACKAGE_NAME = "shearwave"
