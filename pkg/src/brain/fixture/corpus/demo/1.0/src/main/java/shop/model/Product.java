package shop.model;

import java.math.BigDecimal;

public class Product {
    private final String sku;
    private final String title;
    private final BigDecimal price;

    public Product(String sku, String title, BigDecimal price) {
        this.sku = sku;
        this.title = title;
        this.price = price;
    }

    public String sku() {
        return sku;
    }

    public BigDecimal price() {
        return price;
    }
}
